#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "squery/guards.hpp"

namespace squery {

using StateId = int;

/// Marker label of the single state of an object without a behavior; it
/// matches any observed behavior set.
inline const std::string kAnyBehavior = "*";

struct HState {
  StateId id = 0;
  std::string name;
  int level = 0;                     // owning level
  std::optional<int> child;          // child level of a hierarchical state
  std::optional<std::string> label;  // output of a base state
  bool terminal = false;             // the terminate state of its level
};

enum class TransitionKind {
  Condition,        // guard over the current inputs
  Completion,       // declared completion condition of a primitive
  ChildTerminated,  // the source state's child machine reached its terminate state
};

struct Transition {
  StateId from = 0;
  StateId to = 0;
  TransitionKind kind = TransitionKind::Condition;
  int guard = -1;        // index into Hfsm::guards; -1 for ChildTerminated
  bool suspend = false;  // keep the source's active path for a later resume
  bool resume = false;   // return to the path suspended when the source was entered
};

/// One level of the hierarchy: the states of a single (sub)machine.
struct Level {
  int id = 0;
  std::optional<StateId> parent;  // hierarchical state owning this level; none for the root
  std::vector<StateId> states;
  std::vector<StateId> initial;
  StateId terminal = 0;
};

/// Hierarchical state machine of one program object. Levels form a tree rooted
/// at levels[0].
struct Hfsm {
  std::string object;
  std::string object_class;
  std::optional<std::string> behavior;
  std::vector<HState> states;
  std::vector<Level> levels;
  std::vector<Transition> transitions;
  std::vector<Guard> guards;
  std::set<std::string> inputs;   // observed features read by guards
  std::set<std::string> outputs;  // labels of base states
  ViewParams view;

  const HState& state(StateId id) const;
  bool is_base(StateId id) const { return !state(id).child && !state(id).terminal; }
  std::vector<const Transition*> exits(StateId id) const;
  std::size_t base_state_count() const;
  bool unconstrained() const { return outputs.count(kAnyBehavior) > 0; }
};

struct HfsmBundle {
  std::vector<Hfsm> machines;  // program object order
  std::map<std::string, ViewParams> view;

  const Hfsm* find(const std::string& object) const;
};

/// Active configuration of one machine: one entry per level from the root
/// down to a base state (or to the root's terminate state). An Interrupt entry
/// carries the path of the Try state it suspended.
struct PathEntry {
  StateId state = 0;
  std::vector<PathEntry> suspended;
};

bool operator==(const PathEntry& a, const PathEntry& b);
bool operator<(const PathEntry& a, const PathEntry& b);

using ActivePath = std::vector<PathEntry>;

std::string path_to_string(const Hfsm& m, const ActivePath& path);

}  // namespace squery
