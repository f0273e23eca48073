#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "squery/ast.hpp"
#include "squery/engine.hpp"
#include "squery/hfsm.hpp"
#include "squery/road_map.hpp"
#include "squery/trace.hpp"
#include "squery/world.hpp"

namespace squery {

/// Everything derived from a program once and shared by every query.
struct CompiledProgram {
  ScenarioAST ast;
  HfsmBundle bundle;
  InitialConstraints init;
};

/// Translates the program and gathers its initial constraints.
CompiledProgram compile_program(ScenarioAST ast);

/// Lazy backtracking enumeration of injective, class-compatible
/// correspondences whose targets stay present for at least `m` consecutive
/// frames. Program objects vary slowest-last in declaration order; candidates
/// follow trace declaration order.
class CorrespondenceEnumerator {
 public:
  CorrespondenceEnumerator(const ScenarioAST& ast, const LabelTrace& trace, std::size_t m);

  std::optional<Correspondence> next();
  /// Excludes an assignment from every later `next()`.
  void block(const Correspondence& corr) { blocked_.insert(corr); }
  std::size_t yielded() const { return yielded_; }

 private:
  std::vector<std::string> objects_;
  std::vector<std::vector<std::string>> options_;
  std::vector<std::size_t> pos_;
  std::set<std::string> used_;
  std::set<Correspondence> blocked_;
  std::size_t yielded_ = 0;
  bool started_ = false;
  bool done_ = false;

  void release(std::size_t depth);
};

std::vector<Correspondence> correspondence_candidates(const ScenarioAST& ast, const LabelTrace& trace,
                                                      std::size_t m);

/// Window [i, i+m) matches under `corr`: the first frame satisfies the
/// initial constraints and no machine's configuration set empties. Missing
/// features and geometric domain errors make the window fail.
bool match_window(const CompiledProgram& program, const LabelTrace& trace, const Correspondence& corr, std::size_t i,
                  std::size_t m, const RoadMap& map, const WorldOptions& options = {});

struct Witness {
  Correspondence correspondence;
  std::size_t window_start = 0;
  bool operator==(const Witness&) const = default;
};

struct QueryStats {
  std::size_t correspondences_tried = 0;
  std::size_t windows_checked = 0;
  double wall_ms = 0.0;
  bool timed_out = false;
};

struct QueryResult {
  bool matched = false;
  std::optional<Witness> witness;
  std::vector<Witness> witnesses;  // every witness, only with find_all
  QueryStats stats;
  std::string source;               // trace file, when known
  std::optional<std::string> error;  // per-item failure in batch mode

  nlohmann::json to_json() const;
};

struct QueryOptions {
  bool find_all = false;
  std::optional<std::chrono::duration<double>> timeout;
  WorldOptions world;
};

/// Throws ConfigError unless 1 <= m <= trace length.
QueryResult query(const CompiledProgram& program, const LabelTrace& trace, std::size_t m, const RoadMap& map,
                  const QueryOptions& options = {});
QueryResult query(const ScenarioAST& ast, const LabelTrace& trace, std::size_t m, const RoadMap& map,
                  const QueryOptions& options = {});

/// One result per input, in input order. Load and query errors are reported
/// on their own item. `jobs` = 0 uses every hardware thread.
std::vector<QueryResult> batch_query(const CompiledProgram& program, const std::vector<std::filesystem::path>& traces,
                                     std::size_t m, const RoadMap& map, const QueryOptions& options = {},
                                     unsigned jobs = 1);

}  // namespace squery
