#pragma once

#include <optional>
#include <string>
#include <vector>

#include "squery/ast.hpp"
#include "squery/hfsm.hpp"

namespace squery {

/// One HFSM per program object. Throws TranslationError if the AST holds
/// constructs outside the supported fragment.
HfsmBundle translate(const ScenarioAST& ast);

/// Predicate that holds once the machine rooted at `state` has terminated.
/// Throws UnknownState.
Guard termination_predicate(StateId state, const Hfsm& machine);
Guard termination_predicate(const std::string& object, StateId state, const HfsmBundle& bundle);

/// A guard literal: the guard must be able to take the given truth value.
struct Literal {
  int guard = 0;
  bool positive = true;
  auto operator<=>(const Literal&) const = default;
};

struct FlatEdge {
  int from = 0;
  int to = 0;
  std::vector<Literal> literals;  // conjunction; empty means always enabled
};

/// Flat nondeterministic machine equivalent to an HFSM: each state is a full
/// active configuration; `terminated` is the configuration after the root ends.
struct FlatNfa {
  std::string object;
  std::vector<Guard> guards;
  std::vector<ActivePath> configs;
  std::vector<std::optional<std::string>> labels;  // none for the terminated state
  std::vector<int> initial;
  std::vector<FlatEdge> edges;
  int terminated = -1;

  std::size_t size() const { return configs.size(); }
  std::vector<const FlatEdge*> out_edges(int state) const;
};

FlatNfa flatten(const Hfsm& machine);

/// Structural JSON dump and Graphviz rendering of a bundle.
std::string bundle_to_json(const HfsmBundle& bundle, int indent = 2);
std::string bundle_to_dot(const HfsmBundle& bundle);

}  // namespace squery
