#include "squery/oracle.hpp"

#include <functional>
#include <optional>

#include "squery/errors.hpp"

namespace squery {

std::set<OutputSequence> enumerate_runs(const FlatNfa& nfa, const std::vector<Frame>& frames,
                                        const Correspondence& corr, const RoadMap& map,
                                        const std::map<std::string, ViewParams>& view, const WorldOptions& options,
                                        const OracleBudget& budget) {
  if (frames.size() > budget.max_frames)
    throw BudgetExceeded(std::to_string(frames.size()) + " frames exceed the oracle budget of " +
                         std::to_string(budget.max_frames));
  if (nfa.size() > budget.max_states)
    throw BudgetExceeded("machine of '" + nfa.object + "' has " + std::to_string(nfa.size()) +
                         " flat states, over the oracle budget of " + std::to_string(budget.max_states));

  // Guards are evaluated on first use so that unreachable guards never raise.
  std::vector<EvalContext> contexts;
  for (const auto& f : frames) {
    contexts.push_back(make_context(f.scene, corr, map, view, options));
    contexts.back().self = nfa.object;
  }
  std::vector<std::vector<std::optional<TriState>>> attainable(
      frames.size(), std::vector<std::optional<TriState>>(nfa.guards.size()));
  auto enabled = [&](const FlatEdge& e, std::size_t t) {
    for (const auto& lit : e.literals) {
      auto& slot = attainable[t][static_cast<std::size_t>(lit.guard)];
      if (!slot) slot = guard_sat(nfa.guards[static_cast<std::size_t>(lit.guard)], contexts[t], options.guard);
      if (lit.positive ? !slot->can_true : !slot->can_false) return false;
    }
    return true;
  };

  std::set<OutputSequence> out;
  OutputSequence seq;
  std::function<void(int, std::size_t)> dfs = [&](int config, std::size_t t) {
    if (t == frames.size()) {
      out.insert(seq);
      if (out.size() > budget.max_sequences) throw BudgetExceeded("too many output sequences");
      return;
    }
    for (const FlatEdge* e : nfa.out_edges(config)) {
      if (!enabled(*e, t)) continue;
      const auto& label = nfa.labels[static_cast<std::size_t>(e->to)];
      if (!label) continue;
      seq.push_back(*label);
      dfs(e->to, t + 1);
      seq.pop_back();
    }
  };
  for (int init : nfa.initial) dfs(init, 0);
  return out;
}

namespace {

void all_correspondences(const ScenarioAST& ast, const LabelTrace& trace, std::size_t k, Correspondence& cur,
                         std::set<std::string>& used, std::vector<Correspondence>& out) {
  if (k == ast.objects.size()) {
    out.push_back(cur);
    return;
  }
  const ObjectDecl& obj = ast.objects[k];
  for (const auto& t : trace.objects) {
    if (t.object_class != obj.object_class || used.count(t.id)) continue;
    used.insert(t.id);
    cur.mapping[obj.name] = t.id;
    all_correspondences(ast, trace, k + 1, cur, used, out);
    cur.mapping.erase(obj.name);
    used.erase(t.id);
  }
}

bool sequence_observed(const OutputSequence& seq, const std::vector<Frame>& frames, const std::string& id) {
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq[t] == kAnyBehavior) continue;
    auto it = frames[t].behaviors.find(id);
    if (it == frames[t].behaviors.end() || !it->second.count(seq[t])) return false;
  }
  return true;
}

}  // namespace

bool brute_force_match(const ScenarioAST& ast, const LabelTrace& trace, std::size_t m, const RoadMap& map,
                       const WorldOptions& options, const OracleBudget& budget) {
  if (m == 0 || m > trace.size()) return false;
  if (m > budget.max_frames)
    throw BudgetExceeded("window of " + std::to_string(m) + " frames exceeds the oracle budget");
  const HfsmBundle bundle = translate(ast);
  std::vector<FlatNfa> flat;
  for (const auto& machine : bundle.machines) flat.push_back(flatten(machine));
  const InitialConstraints init = initial_constraints(ast);

  std::vector<Correspondence> corrs;
  Correspondence cur;
  std::set<std::string> used;
  all_correspondences(ast, trace, 0, cur, used, corrs);

  for (const auto& corr : corrs) {
    for (std::size_t i = 0; i + m <= trace.size(); ++i) {
      const std::vector<Frame> window(trace.frames.begin() + static_cast<std::ptrdiff_t>(i),
                                      trace.frames.begin() + static_cast<std::ptrdiff_t>(i + m));
      bool present = true;
      for (const auto& f : window) {
        for (const auto& [_, id] : corr.mapping) present = present && f.scene.find(id) != nullptr;
      }
      if (!present) continue;
      try {
        if (!initial_input_match(init, window.front().scene, corr, map, options)) continue;
        bool all = true;
        for (const auto& nfa : flat) {
          const std::string& id = *corr.target(nfa.object);
          const auto runs = enumerate_runs(nfa, window, corr, map, bundle.view, options, budget);
          bool any = false;
          for (const auto& seq : runs) {
            if (sequence_observed(seq, window, id)) {
              any = true;
              break;
            }
          }
          if (!any) {
            all = false;
            break;
          }
        }
        if (all) return true;
      } catch (const MissingFeature&) {
      } catch (const DomainError&) {
      }
    }
  }
  return false;
}

}  // namespace squery
