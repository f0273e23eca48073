#include "squery/query.hpp"

#include <atomic>
#include <thread>

#include "squery/compiler.hpp"
#include "squery/errors.hpp"

namespace squery {

CompiledProgram compile_program(ScenarioAST ast) {
  CompiledProgram p;
  p.bundle = translate(ast);
  p.init = initial_constraints(ast);
  p.ast = std::move(ast);
  return p;
}

CorrespondenceEnumerator::CorrespondenceEnumerator(const ScenarioAST& ast, const LabelTrace& trace, std::size_t m) {
  for (const auto& obj : ast.objects) {
    objects_.push_back(obj.name);
    std::vector<std::string> opts;
    for (const auto& t : trace.objects) {
      if (t.object_class == obj.object_class && longest_presence(trace, t.id) >= m) opts.push_back(t.id);
    }
    options_.push_back(std::move(opts));
  }
  pos_.assign(objects_.size(), 0);
}

void CorrespondenceEnumerator::release(std::size_t depth) {
  used_.erase(options_[depth][pos_[depth]]);
}

std::optional<Correspondence> CorrespondenceEnumerator::next() {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(objects_.size());
  if (done_ || n == 0) {
    done_ = true;
    return std::nullopt;
  }
  std::ptrdiff_t d = 0;
  if (!started_) {
    started_ = true;
    pos_[0] = 0;
  } else {
    d = n - 1;
    release(static_cast<std::size_t>(d));
    ++pos_[static_cast<std::size_t>(d)];
  }
  while (d >= 0) {
    const auto k = static_cast<std::size_t>(d);
    while (pos_[k] < options_[k].size() && used_.count(options_[k][pos_[k]])) ++pos_[k];
    if (pos_[k] == options_[k].size()) {
      if (--d >= 0) {
        release(static_cast<std::size_t>(d));
        ++pos_[static_cast<std::size_t>(d)];
      }
      continue;
    }
    used_.insert(options_[k][pos_[k]]);
    if (d + 1 < n) {
      pos_[k + 1] = 0;
      ++d;
      continue;
    }
    Correspondence c;
    for (std::size_t j = 0; j < objects_.size(); ++j) c.mapping[objects_[j]] = options_[j][pos_[j]];
    if (blocked_.count(c)) {
      release(k);
      ++pos_[k];
      continue;
    }
    ++yielded_;
    return c;
  }
  done_ = true;
  return std::nullopt;
}

std::vector<Correspondence> correspondence_candidates(const ScenarioAST& ast, const LabelTrace& trace,
                                                      std::size_t m) {
  CorrespondenceEnumerator e(ast, trace, m);
  std::vector<Correspondence> out;
  while (auto c = e.next()) out.push_back(std::move(*c));
  return out;
}

namespace {

bool all_present(const Frame& frame, const Correspondence& corr) {
  for (const auto& [_, id] : corr.mapping) {
    if (!frame.scene.find(id)) return false;
  }
  return true;
}

}  // namespace

bool match_window(const CompiledProgram& program, const LabelTrace& trace, const Correspondence& corr, std::size_t i,
                  std::size_t m, const RoadMap& map, const WorldOptions& options) {
  if (m == 0 || i + m > trace.size()) return false;
  // Presence is checked frame by frame so that a failing window stops early;
  // any absence inside the window still rejects it.
  if (!all_present(trace.frames[i], corr)) return false;
  try {
    if (!initial_input_match(program.init, trace.frames[i].scene, corr, map, options)) return false;
    BaseStateSet states = initial_base_states(program.bundle);
    for (std::size_t t = i; t < i + m; ++t) {
      if (!all_present(trace.frames[t], corr)) return false;
      states = valid_step(states, program.bundle, trace.frames[t], corr, map, options);
      if (any_empty(states)) return false;
    }
  } catch (const MissingFeature&) {
    return false;
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

nlohmann::json QueryResult::to_json() const {
  using nlohmann::json;
  auto witness_json = [](const Witness& w) {
    return json{{"correspondence", w.correspondence.mapping}, {"window_start", w.window_start}};
  };
  json j;
  if (!source.empty()) j["trace"] = source;
  j["matched"] = matched;
  j["witness"] = witness ? witness_json(*witness) : json(nullptr);
  if (!witnesses.empty()) {
    j["witnesses"] = json::array();
    for (const auto& w : witnesses) j["witnesses"].push_back(witness_json(w));
  }
  j["stats"] = {{"correspondences_tried", stats.correspondences_tried},
                {"windows_checked", stats.windows_checked},
                {"wall_ms", stats.wall_ms},
                {"timed_out", stats.timed_out}};
  if (error) j["error"] = *error;
  return j;
}

QueryResult query(const CompiledProgram& program, const LabelTrace& trace, std::size_t m, const RoadMap& map,
                  const QueryOptions& options) {
  if (m < 1 || m > trace.size())
    throw ConfigError("window length " + std::to_string(m) + " outside [1, " + std::to_string(trace.size()) + "]");
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto deadline =
      options.timeout ? std::optional(start + std::chrono::duration_cast<clock::duration>(*options.timeout))
                      : std::nullopt;
  QueryResult r;
  CorrespondenceEnumerator candidates(program.ast, trace, m);
  bool stop = false;
  while (!stop) {
    auto corr = candidates.next();
    if (!corr) break;
    ++r.stats.correspondences_tried;
    for (std::size_t i = 0; i + m <= trace.size(); ++i) {
      if (deadline && clock::now() > *deadline) {
        r.stats.timed_out = true;
        stop = true;
        break;
      }
      ++r.stats.windows_checked;
      if (!match_window(program, trace, *corr, i, m, map, options.world)) continue;
      Witness w{*corr, i};
      if (!r.witness) r.witness = w;
      r.matched = true;
      if (!options.find_all) {
        stop = true;
        break;
      }
      r.witnesses.push_back(std::move(w));
    }
  }
  r.stats.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return r;
}

QueryResult query(const ScenarioAST& ast, const LabelTrace& trace, std::size_t m, const RoadMap& map,
                  const QueryOptions& options) {
  return query(compile_program(ast), trace, m, map, options);
}

std::vector<QueryResult> batch_query(const CompiledProgram& program, const std::vector<std::filesystem::path>& traces,
                                     std::size_t m, const RoadMap& map, const QueryOptions& options, unsigned jobs) {
  std::vector<QueryResult> out(traces.size());
  auto run = [&](std::size_t k) {
    QueryResult& r = out[k];
    try {
      const LabelTrace t = load_trace(traces[k]);
      r = query(program, t, m, map, options);
    } catch (const FormatError& e) {
      r.error = std::string("FormatError: ") + e.what();
    } catch (const ValidationError& e) {
      r.error = std::string("ValidationError: ") + e.what();
    } catch (const ConfigError& e) {
      r.error = std::string("ConfigError: ") + e.what();
    } catch (const Error& e) {
      r.error = e.what();
    }
    r.source = traces[k].string();
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, traces.size()));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < traces.size(); ++k) run(k);
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = cursor.fetch_add(1)) < traces.size();) run(k);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace squery
