#include "squery/engine.hpp"

#include <vector>

namespace squery {

namespace {

void enter(const Hfsm& m, StateId s, ActivePath suspended, ActivePath prefix, std::vector<ActivePath>& out) {
  prefix.push_back(PathEntry{s, std::move(suspended)});
  const HState& st = m.state(s);
  if (!st.child) {
    out.push_back(std::move(prefix));
    return;
  }
  for (StateId init : m.levels[static_cast<std::size_t>(*st.child)].initial) enter(m, init, {}, prefix, out);
}

class Stepper {
 public:
  Stepper(const Hfsm& m, const GuardValues& values) : m_(m), values_(values), cache_(m.guards.size()) {}

  // Successor suffixes of path[depth..].
  std::vector<ActivePath> step(const ActivePath& path, std::size_t depth) {
    const PathEntry& here = path[depth];
    const HState& s = m_.state(here.state);
    std::vector<ActivePath> out;
    if (s.terminal) return out;

    bool stays = true;
    std::vector<const Transition*> on_child_end;
    for (const Transition* t : m_.exits(here.state)) {
      if (t->guard < 0) {
        on_child_end.push_back(t);
        continue;
      }
      const TriState v = sat(t->guard);
      stays = stays && v.can_false;
      if (!v.can_true) continue;
      ActivePath kept;
      if (t->suspend) kept.assign(path.begin() + static_cast<std::ptrdiff_t>(depth), path.end());
      enter(m_, t->to, std::move(kept), {}, out);
    }
    if (!stays) return out;
    if (!s.child) {
      out.push_back({here});
      return out;
    }
    for (auto& sub : step(path, depth + 1)) {
      if (!m_.state(sub.front().state).terminal) {
        sub.insert(sub.begin(), here);
        out.push_back(std::move(sub));
        continue;
      }
      // The child finished within this step: its termination transitions fire now.
      for (const Transition* t : on_child_end) {
        if (!t->resume) {
          enter(m_, t->to, {}, {}, out);
        } else if (!here.suspended.empty()) {
          out.push_back(here.suspended);
        }
      }
    }
    return out;
  }

  TriState sat(int guard) {
    auto& slot = cache_[static_cast<std::size_t>(guard)];
    if (!slot) slot = values_(guard);
    return *slot;
  }

 private:
  const Hfsm& m_;
  const GuardValues& values_;
  std::vector<std::optional<TriState>> cache_;
};

}  // namespace

std::set<ActivePath> initial_paths(const Hfsm& m) {
  std::vector<ActivePath> out;
  for (StateId s : m.levels.front().initial) enter(m, s, {}, {}, out);
  return {out.begin(), out.end()};
}

BaseStateSet initial_base_states(const HfsmBundle& bundle) {
  BaseStateSet out;
  for (const auto& m : bundle.machines) out[m.object] = initial_paths(m);
  return out;
}

std::optional<std::string> base_label(const Hfsm& m, const ActivePath& path) {
  if (path.empty()) return std::nullopt;
  const HState& s = m.state(path.back().state);
  return s.terminal ? std::nullopt : s.label;
}

std::set<ActivePath> step_machine(const Hfsm& m, const std::set<ActivePath>& current, const EvalContext& ctx,
                                  const GuardOptions& options) {
  EvalContext local = ctx;
  local.self = m.object;
  const GuardValues values = [&](int g) { return guard_sat(m.guards[static_cast<std::size_t>(g)], local, options); };
  return step_machine(m, current, values);
}

std::set<ActivePath> step_machine(const Hfsm& m, const std::set<ActivePath>& current, const GuardValues& values) {
  Stepper stepper(m, values);
  std::set<ActivePath> out;
  for (const auto& path : current) {
    for (auto& next : stepper.step(path, 0)) {
      if (!m.state(next.back().state).terminal) out.insert(std::move(next));
    }
  }
  return out;
}

BaseStateSet valid_step(const BaseStateSet& current, const HfsmBundle& bundle, const Frame& frame,
                        const Correspondence& corr, const RoadMap& map, const WorldOptions& options) {
  const EvalContext ctx = make_context(frame.scene, corr, map, bundle.view, options);
  BaseStateSet out;
  for (const auto& m : bundle.machines) {
    const std::string* id = corr.target(m.object);
    if (!id) throw MissingFeature("program object '" + m.object + "' has no correspondent");
    if (!frame.scene.find(*id))
      throw MissingFeature("'" + *id + "' is absent from frame " + std::to_string(frame.index()));
    auto it = current.find(m.object);
    auto& next = out[m.object];
    if (it == current.end() || it->second.empty()) continue;
    const auto observed = frame.behaviors.find(*id);
    for (auto& path : step_machine(m, it->second, ctx, options.guard)) {
      const auto label = base_label(m, path);
      if (!label) continue;
      const bool keep = *label == kAnyBehavior ||
                        (observed != frame.behaviors.end() && observed->second.count(*label) > 0);
      if (keep) next.insert(path);
    }
  }
  return out;
}

bool any_empty(const BaseStateSet& states) {
  for (const auto& [_, paths] : states) {
    if (paths.empty()) return true;
  }
  return false;
}

TriState termination_holds(const Hfsm& m, const ActivePath& path, StateId state, const EvalContext& ctx,
                           const GuardOptions& options) {
  const HState& s = m.state(state);
  if (s.terminal) return TriState::of(true);
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i].state != state) continue;
    if (!s.child) break;
    return TriState::of(i + 1 < path.size() && m.state(path[i + 1].state).terminal);
  }
  if (s.child) return TriState::of(false);
  for (const Transition* t : m.exits(state)) {
    if (t->kind != TransitionKind::Completion) continue;
    EvalContext local = ctx;
    local.self = m.object;
    return guard_sat(m.guards[static_cast<std::size_t>(t->guard)], local, options);
  }
  return TriState::of(false);
}

}  // namespace squery
