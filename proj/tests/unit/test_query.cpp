#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>

#include "random_instance.hpp"
#include "squery/dsl.hpp"
#include "squery/query.hpp"
#include "squery/synth.hpp"

using namespace squery;
using squery::testing::fixture_path;

namespace {

struct Example {
  CompiledProgram program = compile_program(parse_file(fixture_path("lane_change.scq")));
  LabelTrace trace = load_trace(fixture_path("lane_change_trace.json"));
  RoadMap map = load_map(fixture_path("two_lane_map.json"));
};

Correspondence corr(std::map<std::string, std::string> m) {
  Correspondence c;
  c.mapping = std::move(m);
  return c;
}

std::vector<std::filesystem::path> batch_files() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(fixture_path("batch"))) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

TEST_CASE("two candidate correspondences for the worked example", "[query]") {
  const Example ex;
  const auto all = correspondence_candidates(ex.program.ast, ex.trace, 5);
  REQUIRE(all.size() == 2);
  CHECK(all[0] == corr({{"ego", "car1"}, {"otherCar", "car2"}}));
  CHECK(all[1] == corr({{"ego", "car2"}, {"otherCar", "car1"}}));
  for (const auto& c : all) CHECK(c.injective());
}

TEST_CASE("correspondences respect classes and durations", "[query]") {
  const Example ex;
  CHECK(correspondence_candidates(parse("p = new Pedestrian\n"), ex.trace, 1).empty());
  CHECK(correspondence_candidates(ex.program.ast, ex.trace, 6).empty());

  LabelTrace short_lived = ex.trace;
  for (std::size_t t = 3; t < 5; ++t) {
    short_lived.frames[t].scene.objects.erase("car2");
    short_lived.frames[t].behaviors.erase("car2");
  }
  CHECK(correspondence_candidates(ex.program.ast, short_lived, 5).empty());
  CHECK(correspondence_candidates(ex.program.ast, short_lived, 3).size() == 2);
  CHECK(correspondence_candidates(parse("a = new Car\nb = new Car\nc = new Car\n"), ex.trace, 1).empty());
}

TEST_CASE("blocked assignments are skipped", "[query]") {
  const Example ex;
  CorrespondenceEnumerator e(ex.program.ast, ex.trace, 5);
  e.block(corr({{"ego", "car1"}, {"otherCar", "car2"}}));
  const auto first = e.next();
  REQUIRE(first);
  CHECK(*first == corr({{"ego", "car2"}, {"otherCar", "car1"}}));
  CHECK_FALSE(e.next());
  CHECK(e.yielded() == 1);
}

TEST_CASE("windows of the worked example", "[query]") {
  const Example ex;
  CHECK(match_window(ex.program, ex.trace, corr({{"ego", "car2"}, {"otherCar", "car1"}}), 0, 5, ex.map));
  CHECK_FALSE(match_window(ex.program, ex.trace, corr({{"ego", "car1"}, {"otherCar", "car2"}}), 0, 5, ex.map));
  CHECK_FALSE(match_window(ex.program, ex.trace, corr({{"ego", "car2"}, {"otherCar", "car1"}}), 1, 5, ex.map));
}

TEST_CASE("single unconditioned primitive matches one frame", "[query]") {
  const Example ex;
  const CompiledProgram p = compile_program(parse("ego = new Car with behavior Stationary\n"));
  CHECK(match_window(p, ex.trace, corr({{"ego", "car1"}}), 0, 1, ex.map));
  CHECK_FALSE(match_window(p, ex.trace, corr({{"ego", "car2"}}), 0, 1, ex.map));
}

TEST_CASE("query finds the worked-example witness", "[query]") {
  const Example ex;
  const QueryResult r = query(ex.program, ex.trace, 5, ex.map);
  REQUIRE(r.matched);
  REQUIRE(r.witness);
  CHECK(r.witness->correspondence == corr({{"ego", "car2"}, {"otherCar", "car1"}}));
  CHECK(r.witness->window_start == 0);
  CHECK(r.stats.correspondences_tried == 2);
  CHECK(r.stats.windows_checked == 2);
  CHECK(r.stats.wall_ms < 50.0);

  const auto j = r.to_json();
  CHECK(j["matched"] == true);
  CHECK(j["witness"]["correspondence"]["ego"] == "car2");
  CHECK(j["witness"]["window_start"] == 0);
  CHECK(j["stats"].contains("wall_ms"));
}

TEST_CASE("turning ego does not match", "[query]") {
  const Example ex;
  const QueryResult r = query(ex.program, load_trace(fixture_path("lane_change_turn_left.json")), 5, ex.map);
  CHECK_FALSE(r.matched);
  CHECK_FALSE(r.witness);
  // Every candidate and every window was tried.
  CHECK(r.stats.correspondences_tried == 2);
  CHECK(r.stats.windows_checked == 2);
}

TEST_CASE("window length outside the trace", "[query]") {
  const Example ex;
  CHECK_THROWS_AS(query(ex.program, ex.trace, 0, ex.map), ConfigError);
  CHECK_THROWS_AS(query(ex.program, ex.trace, 6, ex.map), ConfigError);
}

TEST_CASE("find_all lists every witness", "[query]") {
  const Example ex;
  QueryOptions o;
  o.find_all = true;
  const QueryResult r = query(ex.program, ex.trace, 2, ex.map, o);
  REQUIRE(r.matched);
  CHECK(r.witnesses.front() == *r.witness);
  for (const auto& w : r.witnesses) CHECK(match_window(ex.program, ex.trace, w.correspondence, w.window_start, 2, ex.map));
  std::size_t expected = 0;
  for (const auto& c : correspondence_candidates(ex.program.ast, ex.trace, 2)) {
    for (std::size_t i = 0; i + 2 <= ex.trace.size(); ++i) expected += match_window(ex.program, ex.trace, c, i, 2, ex.map);
  }
  CHECK(r.witnesses.size() == expected);
}

TEST_CASE("windows checked adds up when nothing matches", "[query]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = squery::testing::random_instance(seed);
    const CompiledProgram p = compile_program(inst.ast);
    const QueryResult r = query(p, inst.trace, inst.m, squery::testing::instance_map());
    CHECK(r.matched == r.witness.has_value());
    if (r.matched) continue;
    const auto n = correspondence_candidates(inst.ast, inst.trace, inst.m).size();
    CHECK(r.stats.correspondences_tried == n);
    CHECK(r.stats.windows_checked == n * (inst.trace.size() - inst.m + 1));
  }
}

TEST_CASE("the verdict does not depend on candidate order", "[query]") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = squery::testing::random_instance(seed);
    LabelTrace reversed = inst.trace;
    std::reverse(reversed.objects.begin(), reversed.objects.end());
    const auto& map = squery::testing::instance_map();
    INFO("seed " << seed);
    CHECK(query(inst.ast, inst.trace, inst.m, map).matched == query(inst.ast, reversed, inst.m, map).matched);
  }
}

TEST_CASE("a generated trace matches its own program", "[query]") {
  const ScenarioAST ast = parse_file(fixture_path("lane_change.scq"));
  SynthConfig cfg;
  cfg.seed = 42;
  cfg.length = 100;
  const QueryResult r = query(ast, generate_trace(ast, default_synth_map(), cfg), 50, default_synth_map());
  CHECK(r.matched);
}

TEST_CASE("timeouts stop the search", "[query]") {
  const ScenarioAST ast = scale_program(parse_file(fixture_path("lane_change.scq")), 8);
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.shuffle_ids = true;
  const LabelTrace t = generate_trace(ast, default_synth_map(), cfg);
  QueryOptions o;
  o.timeout = std::chrono::nanoseconds(1);
  const QueryResult r = query(ast, t, 50, default_synth_map(), o);
  CHECK(r.stats.timed_out);
  CHECK_FALSE(r.matched);
}

TEST_CASE("batch queries isolate failures", "[query]") {
  const Example ex;
  const RoadMap map = default_synth_map();
  const auto files = batch_files();
  REQUIRE(files.size() == 5);
  for (unsigned jobs : {1u, 3u}) {
    const auto results = batch_query(ex.program, files, 10, map, {}, jobs);
    REQUIRE(results.size() == 5);
    std::size_t matched = 0, errors = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(results[k].source == files[k].string());
      matched += results[k].matched;
      if (results[k].error) {
        ++errors;
        CHECK(results[k].error->rfind("FormatError", 0) == 0);
      }
    }
    CHECK(matched == 2);
    CHECK(errors == 1);
    CHECK(results[0].matched);
    CHECK(results[1].matched);
    CHECK(results[4].error);
  }
  CHECK(batch_query(ex.program, {}, 5, map).empty());
}
