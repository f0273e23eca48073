#include <catch2/catch_amalgamated.hpp>

#include "random_instance.hpp"
#include "squery/dsl.hpp"
#include "squery/synth.hpp"

using namespace squery;
using squery::testing::fixture_path;
using squery::testing::read_file;

namespace {

const char* kLaneChange = R"(
primitive LaneChange completes when Range(0, 1) > 0.5

behavior EgoBehavior():
    try:
        do FollowLane()
    interrupt when (distance from ego to otherCar) < Range(1, 15):
        do LaneChange()

ego = new Car on lane, with behavior EgoBehavior
otherCar = new Car on ego.lane, visible from ego, with behavior Stationary
)";

std::string with_line_in_behavior(const std::string& line) {
  return "behavior B():\n    do FollowLane\n    " + line + "\nego = new Car with behavior B\n";
}

}  // namespace

TEST_CASE("lane-change program parses into two objects and one composite behavior", "[dsl]") {
  const ScenarioAST ast = parse(kLaneChange);
  REQUIRE(ast.objects.size() == 2);
  CHECK(ast.objects[0].name == "ego");
  CHECK(ast.objects[1].name == "otherCar");
  CHECK(ast.behaviors.size() == 1);
  CHECK(ast.primitive_behaviors == std::set<std::string>{"FollowLane", "LaneChange", "Stationary"});
  CHECK(ast.objects[0].behavior == "EgoBehavior");
  CHECK(ast.objects[1].specifiers.size() == 2);
  CHECK(ast.variable_count == 2);
}

TEST_CASE("fixture file and inline source agree", "[dsl]") {
  CHECK(same_program(parse_file(fixture_path("lane_change.scq")), parse(kLaneChange)));
}

TEST_CASE("empty source declares no objects", "[dsl]") {
  CHECK_THROWS_AS(parse(""), SemanticError);
  CHECK_THROWS_AS(parse("# only a comment\n"), SemanticError);
}

TEST_CASE("assignments inside behaviors are outside the fragment", "[dsl]") {
  CHECK_THROWS_AS(parse(with_line_in_behavior("x = 5")), UnsupportedFeature);
  const std::string with_assignment = std::string(kLaneChange).insert(
      std::string(kLaneChange).find("    try:"), "    x = 5\n");
  CHECK_THROWS_AS(parse(with_assignment), UnsupportedFeature);
}

TEST_CASE("fragment_check reports out-of-fragment constructs with locations", "[dsl]") {
  CHECK(fragment_check(parse(kLaneChange)).empty());
  CHECK(fragment_check(parse_file(fixture_path("lane_change_x4.scq"))).empty());

  const auto violations = fragment_check(parse_unchecked(with_line_in_behavior("record ego.position")));
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].loc.line == 3);
  CHECK_THROWS_AS(parse(with_line_in_behavior("record ego.position")), UnsupportedFeature);
}

TEST_CASE("syntax errors carry line and column", "[dsl]") {
  try {
    parse("ego = new Car on\n");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.loc().line == 1);
    CHECK(e.loc().column > 0);
  }
  CHECK_THROWS_AS(parse("ego = new Car,, with behavior Stationary\n"), SyntaxError);
}

TEST_CASE("semantic checks on behavior references", "[dsl]") {
  SECTION("undefined behavior") { CHECK_THROWS_AS(parse("ego = new Car with behavior Nope\n"), SemanticError); }
  SECTION("duplicate object") {
    CHECK_THROWS_AS(parse("ego = new Car\nego = new Car\n"), SemanticError);
  }
  SECTION("duplicate behavior") {
    CHECK_THROWS_AS(parse("behavior A():\n    do FollowLane\nbehavior A():\n    do Brake\nego = new Car\n"),
                    SemanticError);
  }
  SECTION("reference cycle") {
    const char* src = "behavior A():\n    do B()\nbehavior B():\n    do A()\nego = new Car with behavior A\n";
    CHECK_THROWS_AS(parse(src), SemanticError);
  }
  SECTION("unknown class") { CHECK_THROWS_AS(parse("ego = new Spaceship\n"), SemanticError); }
}

TEST_CASE("object classes are a configurable registry", "[dsl]") {
  ParseOptions opts;
  opts.object_classes.insert("Tram");
  CHECK(parse("ego = new Tram\n", opts).objects[0].object_class == "Tram");
}

TEST_CASE("distribution supports", "[dsl]") {
  const ScenarioAST ast = parse(
      "ego = new Car\nrequire (distance to (0, 0)) < Range(1, 15)\n"
      "require (distance to (0, 0)) > Normal(0, 1)\n"
      "require (distance to (0, 0)) > TruncatedNormal(5, 2, 1, 9)\n"
      "require (distance to (0, 0)) > Uniform(3, 1, 2)\n");
  std::vector<Support> supports;
  for (const auto& r : ast.requirements) {
    visit(r.condition, [&](const Expr& e) {
      if (e.kind == ExprKind::Dist) supports.push_back(e.dist.support());
    });
  }
  REQUIRE(supports.size() == 4);
  CHECK(supports[0].lo == 1.0);
  CHECK(supports[0].hi == 15.0);
  CHECK_FALSE(supports[1].bounded());
  CHECK(supports[2].lo == 1.0);
  CHECK(supports[2].hi == 9.0);
  CHECK(supports[3].points == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(parse("ego = new Car\nrequire (distance to (0, 0)) < Range(15, 1)\n"), SemanticError);
}

TEST_CASE("each distribution occurrence is its own variable", "[dsl]") {
  const ScenarioAST ast = parse("ego = new Car\nrequire Range(0, 1) < Range(0, 1)\n");
  std::set<int> ids;
  visit(ast.requirements[0].condition, [&](const Expr& e) {
    if (e.kind == ExprKind::Dist) ids.insert(e.dist.var_id);
  });
  CHECK(ids.size() == 2);
}

TEST_CASE("printing reparses to the same tree", "[dsl]") {
  for (const char* f : {"lane_change.scq", "lane_change_x4.scq", "slowdown.scq"}) {
    const ScenarioAST ast = parse_file(fixture_path(f));
    const std::string printed = print_program(ast);
    INFO(printed);
    CHECK(same_program(parse(printed), ast));
  }
}

TEST_CASE("four-object fixture is the replicated lane-change program", "[dsl]") {
  const ScenarioAST scaled = parse_file(fixture_path("lane_change_x4.scq"));
  CHECK(scaled.objects.size() == 4);
  CHECK(same_program(scaled, scale_program(parse(kLaneChange), 4)));
}

TEST_CASE("parse is total over arbitrary text", "[dsl]") {
  squery::testing::Rng rng(7);
  const std::string alphabet = "abcdefgh ()=:,.<>\n\t    #0123456789_ego new Car do try interrupt when until behavior";
  const std::string base = read_file(fixture_path("lane_change.scq"));
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 1000; ++i) {
    std::string text = base;
    const int edits = 1 + i % 6;
    for (int k = 0; k < edits; ++k) {
      std::uniform_int_distribution<std::size_t> pos(0, text.size() - 1);
      text[pos(rng)] = alphabet[pick(rng)];
    }
    try {
      (void)parse(text);
    } catch (const Error&) {
      // diagnosed
    }
  }
  SUCCEED();
}
