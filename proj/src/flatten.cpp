#include <algorithm>
#include <deque>
#include <map>

#include "squery/compiler.hpp"

// Symbolic step of a single machine: every successor configuration together
// with the guard literals that must be attainable for it. Kept separate from
// the engine's concrete step on purpose; the oracle is built on this file.

namespace squery {

std::vector<const FlatEdge*> FlatNfa::out_edges(int state) const {
  std::vector<const FlatEdge*> out;
  for (const auto& e : edges) {
    if (e.from == state) out.push_back(&e);
  }
  return out;
}

namespace {

struct Alternative {
  ActivePath suffix;
  std::vector<Literal> literals;
};

std::vector<ActivePath> descend(const Hfsm& m, StateId s, ActivePath suspended) {
  PathEntry head{s, std::move(suspended)};
  const HState& st = m.state(s);
  if (!st.child) return {{head}};
  std::vector<ActivePath> out;
  for (StateId init : m.levels[static_cast<std::size_t>(*st.child)].initial) {
    for (auto& tail : descend(m, init, {})) {
      ActivePath p{head};
      p.insert(p.end(), tail.begin(), tail.end());
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<Alternative> step_from(const Hfsm& m, const ActivePath& path, std::size_t depth) {
  const PathEntry& here = path[depth];
  const HState& s = m.state(here.state);
  std::vector<Alternative> out;
  if (s.terminal) return out;

  std::vector<const Transition*> guarded, on_child_end;
  for (const Transition* t : m.exits(here.state)) (t->guard >= 0 ? guarded : on_child_end).push_back(t);

  for (const Transition* t : guarded) {
    ActivePath kept;
    if (t->suspend) kept.assign(path.begin() + static_cast<std::ptrdiff_t>(depth), path.end());
    for (auto& p : descend(m, t->to, kept)) out.push_back({std::move(p), {{t->guard, true}}});
  }

  std::vector<Literal> stay;
  for (const Transition* t : guarded) stay.push_back({t->guard, false});
  if (!s.child) {
    out.push_back({{here}, stay});
    return out;
  }

  for (auto& r : step_from(m, path, depth + 1)) {
    std::vector<Literal> lits = stay;
    lits.insert(lits.end(), r.literals.begin(), r.literals.end());
    if (m.state(r.suffix.front().state).terminal) {
      for (const Transition* t : on_child_end) {
        if (t->resume) {
          if (!here.suspended.empty()) out.push_back({here.suspended, lits});
        } else {
          for (auto& p : descend(m, t->to, {})) out.push_back({std::move(p), lits});
        }
      }
    } else {
      ActivePath p{here};
      p.insert(p.end(), r.suffix.begin(), r.suffix.end());
      out.push_back({std::move(p), std::move(lits)});
    }
  }
  return out;
}

bool normalize(std::vector<Literal>& lits) {
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (std::size_t i = 1; i < lits.size(); ++i) {
    if (lits[i].guard == lits[i - 1].guard) return false;  // g and not g together
  }
  return true;
}

}  // namespace

FlatNfa flatten(const Hfsm& m) {
  FlatNfa nfa;
  nfa.object = m.object;
  nfa.guards = m.guards;
  std::map<ActivePath, int> index;
  std::deque<int> todo;

  auto intern = [&](const ActivePath& p) {
    auto [it, fresh] = index.emplace(p, static_cast<int>(nfa.configs.size()));
    if (fresh) {
      nfa.configs.push_back(p);
      const HState& last = m.state(p.back().state);
      nfa.labels.push_back(last.terminal ? std::nullopt : last.label);
      todo.push_back(it->second);
    }
    return it->second;
  };

  const Level& root = m.levels.front();
  for (StateId s : root.initial) {
    for (const auto& p : descend(m, s, {})) nfa.initial.push_back(intern(p));
  }
  // The terminated state exists only when the root level can be left.
  const ActivePath ended{PathEntry{root.terminal, {}}};
  const bool can_end = std::any_of(m.transitions.begin(), m.transitions.end(),
                                   [&](const Transition& t) { return t.to == root.terminal; });
  if (can_end) nfa.terminated = intern(ended);

  while (!todo.empty()) {
    const int c = todo.front();
    todo.pop_front();
    if (nfa.configs[static_cast<std::size_t>(c)] == ended) {
      nfa.terminated = c;
      continue;
    }
    const ActivePath from = nfa.configs[static_cast<std::size_t>(c)];
    std::vector<FlatEdge> local;
    for (auto& alt : step_from(m, from, 0)) {
      if (!normalize(alt.literals)) continue;
      FlatEdge e{c, intern(alt.suffix), std::move(alt.literals)};
      const bool dup = std::any_of(local.begin(), local.end(),
                                   [&](const FlatEdge& o) { return o.to == e.to && o.literals == e.literals; });
      if (!dup) local.push_back(std::move(e));
    }
    nfa.edges.insert(nfa.edges.end(), local.begin(), local.end());
  }
  return nfa;
}

}  // namespace squery
