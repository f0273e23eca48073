#include "squery/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "squery/query.hpp"
#include "squery/synth.hpp"

namespace squery {

namespace {

BenchRow measure(const std::string& sweep, std::size_t value, const ScenarioAST& ast, const RoadMap& map,
                 std::size_t length, std::size_t m, const BenchOptions& options) {
  const CompiledProgram program = compile_program(ast);
  QueryOptions q;
  q.timeout = options.timeout;
  std::vector<double> times;
  BenchRow row{sweep, value};
  for (std::size_t r = 0; r < options.repeats; ++r) {
    SynthConfig cfg;
    cfg.seed = options.seed + r;
    cfg.length = length;
    cfg.shuffle_ids = true;
    const LabelTrace trace = generate_trace(ast, map, cfg);
    QueryResult res = query(program, trace, m, map, q);
    double best = res.stats.wall_ms, spent = res.stats.wall_ms;
    for (std::size_t k = 1; k < options.max_reruns && spent < options.min_sample_ms && !res.stats.timed_out; ++k) {
      const double ms = query(program, trace, m, map, q).stats.wall_ms;
      best = std::min(best, ms);
      spent += ms;
    }
    times.push_back(best);
    row.timeouts += res.stats.timed_out ? 1 : 0;
    row.matched += res.matched ? 1 : 0;
  }
  row.runs = times.size();
  row.mean_ms = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
  double var = 0.0;
  for (double t : times) var += (t - row.mean_ms) * (t - row.mean_ms);
  row.stddev_ms = times.size() > 1 ? std::sqrt(var / static_cast<double>(times.size() - 1)) : 0.0;
  return row;
}

}  // namespace

std::vector<BenchRow> bench_durations(const ScenarioAST& ast, const RoadMap& map, const std::vector<std::size_t>& lengths,
                                      const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (std::size_t len : lengths) rows.push_back(measure("duration", len, ast, map, len, std::max<std::size_t>(1, len / 2), options));
  return rows;
}

std::vector<BenchRow> bench_objects(const ScenarioAST& ast, const RoadMap& map, const std::vector<std::size_t>& counts,
                                    std::size_t length, std::size_t m, const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (std::size_t n : counts) rows.push_back(measure("objects", n, scale_program(ast, n), map, length, m, options));
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "sweep,value,runs,mean_ms,stddev_ms,timeouts,matched\n";
  for (const auto& r : rows) {
    out << r.sweep << ',' << r.value << ',' << r.runs << ',' << r.mean_ms << ',' << r.stddev_ms << ',' << r.timeouts
        << ',' << r.matched << '\n';
  }
  return out.str();
}

double linear_r2(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return syy == 0 ? 1.0 : 0.0;
  return (sxy * sxy) / (sxx * syy);
}

}  // namespace squery
