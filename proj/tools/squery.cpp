#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "squery/bench.hpp"
#include "squery/compiler.hpp"
#include "squery/dsl.hpp"
#include "squery/errors.hpp"
#include "squery/oracle.hpp"
#include "squery/query.hpp"
#include "squery/synth.hpp"

namespace fs = std::filesystem;
using namespace squery;

namespace {

constexpr int kFound = 0;
constexpr int kNotFound = 1;
constexpr int kFailure = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("squery");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SQUERY_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

RoadMap map_or_default(const std::string& path) {
  if (path.empty()) {
    spdlog::info("no --map given, using the default three-lane road");
    return default_synth_map();
  }
  return load_map(path);
}

std::vector<fs::path> collect_traces(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(in);
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

struct CompileArgs {
  std::string program;
  std::string emit = "json";
  std::string output;
  bool to_stdout = false;
};

int cmd_compile(const CompileArgs& a) {
  const HfsmBundle bundle = translate(parse_file(a.program));
  const bool json = a.emit == "json" || a.emit == "both";
  const bool dot = a.emit == "dot" || a.emit == "both";
  if (a.to_stdout) {
    if (json) std::cout << bundle_to_json(bundle) << '\n';
    if (dot) std::cout << bundle_to_dot(bundle);
    return kFound;
  }
  fs::path base = a.output.empty() ? fs::path(a.program).filename().replace_extension() : fs::path(a.output);
  if (json) {
    const fs::path p = fs::path(base).concat(".json");
    write_file(p, bundle_to_json(bundle) + "\n");
    std::cout << p.string() << '\n';
  }
  if (dot) {
    const fs::path p = fs::path(base).concat(".dot");
    write_file(p, bundle_to_dot(bundle));
    std::cout << p.string() << '\n';
  }
  return kFound;
}

struct MatchArgs {
  std::string program;
  std::vector<std::string> traces;
  std::string map;
  std::size_t m = 1;
  double timeout = 0.0;
  bool find_all = false;
  unsigned jobs = 0;
  std::string format = "json";
};

int cmd_match(const MatchArgs& a) {
  const CompiledProgram program = compile_program(parse_file(a.program));
  const RoadMap map = map_or_default(a.map);
  QueryOptions q;
  q.find_all = a.find_all;
  if (a.timeout > 0) q.timeout = std::chrono::duration<double>(a.timeout);
  const auto files = collect_traces(a.traces);
  spdlog::info("querying {} trace(s) with m = {}", files.size(), a.m);
  const auto results = batch_query(program, files, a.m, map, q, a.jobs);
  bool any_match = false, any_error = false;
  for (const auto& r : results) {
    any_match = any_match || r.matched;
    any_error = any_error || r.error.has_value();
    if (r.stats.timed_out) spdlog::warn("{}: timed out after {:.0f} ms", r.source, r.stats.wall_ms);
    if (a.format == "json") {
      std::cout << r.to_json().dump() << '\n';
    } else if (r.error) {
      std::cout << r.source << ": error: " << *r.error << '\n';
    } else if (r.matched) {
      std::cout << r.source << ": match " << r.witness->correspondence.to_string() << " at frame "
                << r.witness->window_start << '\n';
    } else {
      std::cout << r.source << ": no match" << (r.stats.timed_out ? " (timed out)" : "") << '\n';
    }
  }
  if (any_match) return kFound;
  return any_error ? kFailure : kNotFound;
}

struct GenArgs {
  std::string program;
  std::string map;
  std::string output;
  std::uint64_t seed = 0;
  std::size_t length = 100;
  double dt = 0.5;
  std::size_t objects = 0;
  bool shuffle_ids = false;
};

int cmd_gen(const GenArgs& a) {
  ScenarioAST ast = parse_file(a.program);
  if (a.objects) ast = scale_program(ast, a.objects);
  SynthConfig cfg;
  cfg.seed = a.seed;
  cfg.length = a.length;
  cfg.dt = a.dt;
  cfg.shuffle_ids = a.shuffle_ids;
  const LabelTrace trace = generate_trace(ast, map_or_default(a.map), cfg);
  if (a.output.empty()) {
    std::cout << trace_to_json(trace).dump(1) << '\n';
  } else {
    save_trace(trace, a.output);
  }
  return kFound;
}

struct OracleArgs {
  std::string program;
  std::string trace;
  std::string map;
  std::size_t m = 1;
};

int cmd_oracle(const OracleArgs& a) {
  const bool matched = brute_force_match(parse_file(a.program), load_trace(a.trace), a.m, map_or_default(a.map));
  std::cout << nlohmann::json{{"matched", matched}}.dump() << '\n';
  return matched ? kFound : kNotFound;
}

struct BenchArgs {
  std::string sweep;
  std::string program;
  std::string map;
  std::vector<std::size_t> values;
  std::size_t repeats = 10;
  std::size_t length = 100;
  std::size_t m = 50;
  double timeout = 10.0;
  std::uint64_t seed = 1;
};

int cmd_bench(BenchArgs a) {
  const ScenarioAST ast = parse_file(a.program);
  const RoadMap map = map_or_default(a.map);
  BenchOptions o;
  o.repeats = a.repeats;
  o.seed = a.seed;
  if (a.timeout > 0) o.timeout = std::chrono::duration<double>(a.timeout);
  std::vector<BenchRow> rows;
  if (a.sweep == "duration") {
    if (a.values.empty()) a.values = {20, 40, 60, 80, 100};
    rows = bench_durations(ast, map, a.values, o);
  } else {
    if (a.values.empty()) a.values = {2, 4, 6, 8};
    rows = bench_objects(ast, map, a.values, a.length, a.m, o);
  }
  std::cout << bench_csv(rows);
  return kFound;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const SourceError& e) {
    spdlog::error("{}", e.what());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
  }
  return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Query labeled driving traces with scenario programs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "squery 0.1.0");

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "Translate a program to state machines");
  compile->add_option("program", ca.program, "Scenario program (.scq)")->required()->check(CLI::ExistingFile);
  compile->add_option("--emit", ca.emit, "Output format")->check(CLI::IsMember({"json", "dot", "both"}));
  compile->add_option("-o,--output", ca.output, "Output path without extension");
  compile->add_flag("--stdout", ca.to_stdout, "Print instead of writing files");

  MatchArgs ma;
  auto* match = app.add_subcommand("match", "Find traces containing the scenario");
  match->add_option("program", ma.program, "Scenario program (.scq)")->required()->check(CLI::ExistingFile);
  match->add_option("traces", ma.traces, "Trace files or directories")->required();
  match->add_option("--map", ma.map, "Road map JSON");
  match->add_option("-m,--min-duration", ma.m, "Window length in frames")->check(CLI::PositiveNumber);
  match->add_option("--timeout", ma.timeout, "Seconds per trace (0 = none)")->check(CLI::NonNegativeNumber);
  match->add_flag("--find-all", ma.find_all, "Report every witness");
  match->add_option("--jobs", ma.jobs, "Worker threads (0 = all cores)");
  match->add_option("--format", ma.format, "Output format")->check(CLI::IsMember({"json", "text"}));

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic trace from a program");
  gen->add_option("program", ga.program, "Scenario program (.scq)")->required()->check(CLI::ExistingFile);
  gen->add_option("--map", ga.map, "Road map JSON");
  gen->add_option("-o,--output", ga.output, "Trace file (stdout if omitted)");
  gen->add_option("--seed", ga.seed, "Random seed");
  gen->add_option("--length", ga.length, "Frames")->check(CLI::PositiveNumber);
  gen->add_option("--dt", ga.dt, "Seconds per frame")->check(CLI::PositiveNumber);
  gen->add_option("--objects", ga.objects, "Replicate the program to this many objects");
  gen->add_flag("--shuffle-ids", ga.shuffle_ids, "Anonymize trace object ids");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Brute-force membership check on a small instance");
  oracle->add_option("program", oa.program, "Scenario program (.scq)")->required()->check(CLI::ExistingFile);
  oracle->add_option("trace", oa.trace, "Trace file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--map", oa.map, "Road map JSON");
  oracle->add_option("-m,--min-duration", oa.m, "Window length in frames")->check(CLI::PositiveNumber);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Runtime sweeps over synthetic traces, as CSV");
  bench->add_option("sweep", ba.sweep, "duration or objects")->required()->check(CLI::IsMember({"duration", "objects"}));
  bench->add_option("program", ba.program, "Scenario program (.scq)")->required()->check(CLI::ExistingFile);
  bench->add_option("--map", ba.map, "Road map JSON");
  bench->add_option("--values", ba.values, "Sweep points");
  bench->add_option("--repeats", ba.repeats, "Traces per point")->check(CLI::PositiveNumber);
  bench->add_option("--length", ba.length, "Trace length for the object sweep");
  bench->add_option("-m,--min-duration", ba.m, "Window length for the object sweep");
  bench->add_option("--timeout", ba.timeout, "Seconds per query (0 = none)");
  bench->add_option("--seed", ba.seed, "First seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kFailure;
  }

  if (*compile) return guarded([&] { return cmd_compile(ca); });
  if (*match) return guarded([&] { return cmd_match(ma); });
  if (*gen) return guarded([&] { return cmd_gen(ga); });
  if (*oracle) return guarded([&] { return cmd_oracle(oa); });
  return guarded([&] { return cmd_bench(ba); });
}
