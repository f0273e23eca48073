#pragma once

#include <map>
#include <string>
#include <vector>

#include "squery/ast.hpp"
#include "squery/guards.hpp"
#include "squery/road_map.hpp"
#include "squery/scene.hpp"

namespace squery {

struct WorldOptions {
  double position_tolerance = 1e-9;  // meters
  double heading_tolerance = 1e-9;   // radians
  double equality_tolerance = 1e-9;
  GuardOptions guard;
};

/// View cone parameters of every program object, defaults filled in.
std::map<std::string, ViewParams> view_params(const ScenarioAST& ast);

/// Boolean constraint expressing one specifier of `obj`, with `self` bound to
/// the object itself. Throws SemanticError when it needs an undeclared ego.
ExprPtr specifier_constraint(const ScenarioAST& ast, const ObjectDecl& obj, const Specifier& spec);

/// Every initial-scene constraint of the program: specifiers, then requirements.
struct InitialConstraints {
  std::vector<Guard> constraints;
  std::map<std::string, ViewParams> view;
  std::vector<std::string> objects;  // program objects that must be present
};

InitialConstraints initial_constraints(const ScenarioAST& ast);

EvalContext make_context(const Scene& scene, const Correspondence& corr, const RoadMap& map,
                         const std::map<std::string, ViewParams>& view, const WorldOptions& options);

/// True iff the scene lies in the support of the program's initial
/// distribution under `corr`. Throws MissingFeature.
bool initial_input_match(const InitialConstraints& init, const Scene& scene, const Correspondence& corr,
                         const RoadMap& map, const WorldOptions& options = {});
bool initial_input_match(const ScenarioAST& ast, const Scene& scene, const Correspondence& corr, const RoadMap& map,
                         const WorldOptions& options = {});

/// Whether `target` lies in the view cone of `viewer` (closed sector).
bool can_see(const ObjectState& viewer, const ObjectState& target, const ViewParams& params = {});

}  // namespace squery
