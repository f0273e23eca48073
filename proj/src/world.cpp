#include "squery/world.hpp"

namespace squery {

std::map<std::string, ViewParams> view_params(const ScenarioAST& ast) {
  std::map<std::string, ViewParams> out;
  for (const auto& o : ast.objects) {
    ViewParams p;
    if (o.visible_distance) p.range = *o.visible_distance;
    if (o.view_angle) p.half_angle = *o.view_angle / 2.0;
    out[o.name] = p;
  }
  return out;
}

namespace {

ExprPtr bind_self(const ExprPtr& e, const std::string& name) {
  return rewrite(e, [&](const ExprPtr& n) -> ExprPtr {
    if (n->kind == ExprKind::SelfRef) return make_object(name, n->loc);
    return nullptr;
  });
}

ExprPtr vec2(ExprPtr x, ExprPtr y) { return make_node(ExprKind::Vector, {std::move(x), std::move(y)}); }

ExprPtr local_of(ExprPtr point, ExprPtr origin, ExprPtr heading) {
  return make_node(ExprKind::LocalCoords, {std::move(point), std::move(origin), std::move(heading)});
}

ExprPtr component(ExprPtr v, int index) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Component;
  e->args = {std::move(v)};
  e->number = index;
  return e;
}

}  // namespace

ExprPtr specifier_constraint(const ScenarioAST& ast, const ObjectDecl& obj, const Specifier& spec) {
  std::vector<ExprPtr> a;
  for (const auto& arg : spec.args) a.push_back(arg ? bind_self(arg, obj.name) : nullptr);
  const ExprPtr self = make_object(obj.name, spec.loc);
  auto ego = [&]() {
    if (!ast.find_object("ego"))
      throw SemanticError("'offset by' is relative to ego, but no object is named ego", spec.loc);
    return make_object("ego", spec.loc);
  };
  ExprPtr out;
  switch (spec.kind) {
    case SpecifierKind::At:
      out = make_node(ExprKind::PointNear, {self, a[0]});
      break;
    case SpecifierKind::In:
    case SpecifierKind::On:
      out = make_node(ExprKind::In, {self, a[0]});
      break;
    case SpecifierKind::OffsetBy: {
      const ExprPtr e = ego();
      out = make_node(ExprKind::PointNear, {local_of(self, e, e), a[0]});
      break;
    }
    case SpecifierKind::Beyond: {
      const ExprPtr bearing = make_node(ExprKind::AngleTo, {a[2], a[0]});
      out = make_node(ExprKind::PointNear, {local_of(self, a[0], bearing), a[1]});
      break;
    }
    case SpecifierKind::VisibleFrom:
      out = make_node(ExprKind::CanSee, {a[0], self});
      break;
    case SpecifierKind::AheadOf:
    case SpecifierKind::Behind: {
      const bool ahead = spec.kind == SpecifierKind::AheadOf;
      const ExprPtr local = local_of(self, a[0], a[0]);
      if (a[1]) {
        const ExprPtr along = ahead ? a[1] : make_node(ExprKind::Neg, {a[1]});
        out = make_node(ExprKind::PointNear, {local, vec2(make_number(0), along)});
      } else {
        out = make_compare(ahead ? CmpOp::Ge : CmpOp::Le, component(local, 1), make_number(0));
      }
      break;
    }
    case SpecifierKind::Following:
      out = make_node(ExprKind::FollowDistance, {self, a[1], a[2]});
      break;
    case SpecifierKind::Facing:
      out = make_node(ExprKind::HeadingEq, {self, a[0]});
      break;
    case SpecifierKind::FacingToward:
      out = make_node(ExprKind::HeadingEq, {self, make_node(ExprKind::AngleTo, {self, a[0]})});
      break;
    case SpecifierKind::FacingAwayFrom:
      out = make_node(ExprKind::HeadingEq, {self, make_node(ExprKind::AngleTo, {a[0], self})});
      break;
    case SpecifierKind::ApparentlyFacing: {
      const ExprPtr bearing = make_node(ExprKind::AngleTo, {a[1], self});
      out = make_node(ExprKind::HeadingEq, {self, make_node(ExprKind::Add, {a[0], bearing})});
      break;
    }
  }
  auto located = std::make_shared<Expr>(*out);
  located->loc = spec.loc;
  return located;
}

InitialConstraints initial_constraints(const ScenarioAST& ast) {
  InitialConstraints init;
  init.view = view_params(ast);
  for (const auto& o : ast.objects) {
    init.objects.push_back(o.name);
    for (const auto& s : o.specifiers) init.constraints.emplace_back(specifier_constraint(ast, o, s));
  }
  for (const auto& r : ast.requirements) init.constraints.emplace_back(r.condition);
  return init;
}

EvalContext make_context(const Scene& scene, const Correspondence& corr, const RoadMap& map,
                         const std::map<std::string, ViewParams>& view, const WorldOptions& options) {
  EvalContext ctx;
  ctx.scene = &scene;
  ctx.corr = &corr;
  ctx.map = &map;
  ctx.view = &view;
  ctx.position_tolerance = options.position_tolerance;
  ctx.heading_tolerance = options.heading_tolerance;
  ctx.equality_tolerance = options.equality_tolerance;
  return ctx;
}

bool initial_input_match(const InitialConstraints& init, const Scene& scene, const Correspondence& corr,
                         const RoadMap& map, const WorldOptions& options) {
  for (const auto& name : init.objects) {
    const std::string* id = corr.target(name);
    if (!id) throw MissingFeature("program object '" + name + "' has no corresponding trace object");
    if (!scene.find(*id)) throw MissingFeature("object '" + *id + "' is not observed at frame " + std::to_string(scene.index));
  }
  const EvalContext ctx = make_context(scene, corr, map, init.view, options);
  for (const auto& g : init.constraints) {
    if (!guard_sat(g, ctx, options.guard).can_true) return false;
  }
  return true;
}

bool initial_input_match(const ScenarioAST& ast, const Scene& scene, const Correspondence& corr, const RoadMap& map,
                         const WorldOptions& options) {
  return initial_input_match(initial_constraints(ast), scene, corr, map, options);
}

bool can_see(const ObjectState& viewer, const ObjectState& target, const ViewParams& params) {
  return cone_contains({viewer.position.xy(), viewer.heading, params.half_angle, params.range}, target.position.xy());
}

}  // namespace squery
