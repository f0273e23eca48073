#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "squery/hfsm.hpp"
#include "squery/road_map.hpp"
#include "squery/trace.hpp"
#include "squery/world.hpp"

namespace squery {

/// Current configurations of every machine, keyed by program object. Each
/// configuration is the full active path down to a base state, so the
/// enclosing hierarchical states are a lookup away.
using BaseStateSet = std::map<std::string, std::set<ActivePath>>;

/// Paths obtained by descending from the root's initial states without
/// evaluating any guard.
std::set<ActivePath> initial_paths(const Hfsm& machine);
BaseStateSet initial_base_states(const HfsmBundle& bundle);

/// Label of the base state a path ends in; none for a terminated root.
std::optional<std::string> base_label(const Hfsm& machine, const ActivePath& path);

/// One synchronous step of a single machine before pruning. Paths whose root
/// terminates are dropped. Guards are evaluated once per call.
std::set<ActivePath> step_machine(const Hfsm& machine, const std::set<ActivePath>& current, const EvalContext& ctx,
                                  const GuardOptions& options = {});

/// Attainable truth values of guard `i` of a machine, asked at most once per step.
using GuardValues = std::function<TriState(int)>;

/// Same step with guard values supplied by the caller.
std::set<ActivePath> step_machine(const Hfsm& machine, const std::set<ActivePath>& current, const GuardValues& values);

/// Steps every machine on `frame` and prunes configurations whose label is not
/// in the behavior set of the corresponded trace object. An empty set for any
/// object signals a mismatch. Throws MissingFeature when a corresponded object
/// or a feature a guard reads is absent.
BaseStateSet valid_step(const BaseStateSet& current, const HfsmBundle& bundle, const Frame& frame,
                        const Correspondence& corr, const RoadMap& map, const WorldOptions& options = {});

bool any_empty(const BaseStateSet& states);

/// Attainable values of the termination predicate of `state` given the active
/// path. `state` must lie on the path or be a base state reachable from it.
/// Throws UnknownState.
TriState termination_holds(const Hfsm& machine, const ActivePath& path, StateId state, const EvalContext& ctx,
                           const GuardOptions& options = {});

}  // namespace squery
