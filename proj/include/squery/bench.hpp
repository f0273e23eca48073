#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "squery/ast.hpp"
#include "squery/road_map.hpp"

namespace squery {

struct BenchRow {
  std::string sweep;  // "duration" or "objects"
  std::size_t value = 0;
  std::size_t runs = 0;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  std::size_t timeouts = 0;
  std::size_t matched = 0;
};

struct BenchOptions {
  std::size_t repeats = 10;  // traces per point
  std::uint64_t seed = 1;
  std::optional<std::chrono::duration<double>> timeout;
  /// Short queries are rerun until this much time has been spent on one
  /// trace, and the fastest run counts; slower queries run once.
  double min_sample_ms = 5.0;
  std::size_t max_reruns = 50;
};

/// Query time against synthetic traces of each length, m = length / 2.
std::vector<BenchRow> bench_durations(const ScenarioAST& ast, const RoadMap& map, const std::vector<std::size_t>& lengths,
                                      const BenchOptions& options = {});

/// Query time for the program replicated to each object count.
std::vector<BenchRow> bench_objects(const ScenarioAST& ast, const RoadMap& map, const std::vector<std::size_t>& counts,
                                    std::size_t length, std::size_t m, const BenchOptions& options = {});

std::string bench_csv(const std::vector<BenchRow>& rows);

/// Coefficient of determination of the least-squares line through (x, y).
double linear_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace squery
