#include "squery/ast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "squery/scene.hpp"

namespace squery {

SourceError::SourceError(const std::string& message, SourceLoc loc)
    : Error("line " + std::to_string(loc.line) + ", column " + std::to_string(loc.column) + ": " + message),
      loc_(loc),
      message_(message) {}

bool Correspondence::injective() const {
  std::set<std::string> seen;
  for (const auto& [_, id] : mapping) {
    if (!seen.insert(id).second) return false;
  }
  return true;
}

std::string Correspondence::to_string() const {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (const auto& [from, to] : mapping) {
    out << (first ? "" : ", ") << from << "->" << to;
    first = false;
  }
  out << '}';
  return out.str();
}

bool Support::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

bool Support::contains(double v) const {
  if (discrete()) return std::find(points.begin(), points.end(), v) != points.end();
  return v >= lo && v <= hi;
}

const char* dist_name(DistKind kind) {
  switch (kind) {
    case DistKind::Uniform: return "Uniform";
    case DistKind::Range: return "Range";
    case DistKind::Normal: return "Normal";
    case DistKind::TruncatedNormal: return "TruncatedNormal";
  }
  return "?";
}

Support DistRef::support() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto arity = [&](std::size_t n) {
    if (params.size() != n)
      throw SemanticError(std::string(dist_name(kind)) + " expects " + std::to_string(n) + " parameters", {});
  };
  Support s;
  switch (kind) {
    case DistKind::Range:
      arity(2);
      if (params[0] > params[1]) throw SemanticError("Range(a, b) requires a <= b", {});
      s.lo = params[0];
      s.hi = params[1];
      break;
    case DistKind::Uniform: {
      if (params.empty()) throw SemanticError("Uniform needs at least one value", {});
      s.points = params;
      std::sort(s.points.begin(), s.points.end());
      s.points.erase(std::unique(s.points.begin(), s.points.end()), s.points.end());
      s.lo = s.points.front();
      s.hi = s.points.back();
      break;
    }
    case DistKind::Normal:
      arity(2);
      if (params[1] < 0) throw SemanticError("Normal standard deviation must be non-negative", {});
      s.lo = params[1] == 0 ? params[0] : -inf;
      s.hi = params[1] == 0 ? params[0] : inf;
      break;
    case DistKind::TruncatedNormal:
      arity(4);
      if (params[1] < 0) throw SemanticError("TruncatedNormal standard deviation must be non-negative", {});
      if (params[2] > params[3]) throw SemanticError("TruncatedNormal bounds must be ordered", {});
      s.lo = params[2];
      s.hi = params[3];
      break;
  }
  return s;
}

const char* cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

const char* type_name(ExprType t) {
  switch (t) {
    case ExprType::Scalar: return "scalar";
    case ExprType::Bool: return "boolean";
    case ExprType::Vector: return "vector";
    case ExprType::Region: return "region";
    case ExprType::Object: return "object";
  }
  return "?";
}

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->args.size() != b->args.size()) return false;
  switch (a->kind) {
    case ExprKind::Number:
    case ExprKind::Component:
    case ExprKind::ChildTerminated:
      if (a->number != b->number) return false;
      break;
    case ExprKind::Boolean:
      if (a->boolean != b->boolean) return false;
      break;
    case ExprKind::Dist:
      if (a->dist.kind != b->dist.kind || a->dist.params != b->dist.params || a->dist.var_id != b->dist.var_id)
        return false;
      break;
    case ExprKind::Compare:
      if (a->cmp != b->cmp) return false;
      break;
    case ExprKind::Ident:
    case ExprKind::ObjectRef:
    case ExprKind::Property:
    case ExprKind::RegionNamed:
      if (a->name != b->name) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a->args.size(); ++i) {
    if (!same_expr(a->args[i], b->args[i])) return false;
  }
  return true;
}

bool same_stmt(const StmtPtr& a, const StmtPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->behavior != b->behavior || a->construct != b->construct) return false;
  if (!same_expr(a->condition, b->condition)) return false;
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!same_stmt(a->children[i], b->children[i])) return false;
  }
  return true;
}

namespace {

bool same_specifier(const Specifier& a, const Specifier& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_expr(a.args[i], b.args[i])) return false;
  }
  return true;
}

bool same_object(const ObjectDecl& a, const ObjectDecl& b) {
  if (a.name != b.name || a.object_class != b.object_class || a.anonymous != b.anonymous ||
      a.behavior != b.behavior || a.visible_distance != b.visible_distance || a.view_angle != b.view_angle ||
      a.specifiers.size() != b.specifiers.size() || a.unsupported.size() != b.unsupported.size())
    return false;
  for (std::size_t i = 0; i < a.specifiers.size(); ++i) {
    if (!same_specifier(a.specifiers[i], b.specifiers[i])) return false;
  }
  for (std::size_t i = 0; i < a.unsupported.size(); ++i) {
    if (a.unsupported[i].construct != b.unsupported[i].construct) return false;
  }
  return true;
}

}  // namespace

bool same_program(const ScenarioAST& a, const ScenarioAST& b) {
  if (a.objects.size() != b.objects.size() || a.behaviors.size() != b.behaviors.size() ||
      a.primitive_behaviors != b.primitive_behaviors || a.declared_primitives.size() != b.declared_primitives.size() ||
      a.requirements.size() != b.requirements.size() || a.unsupported.size() != b.unsupported.size())
    return false;
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    if (!same_object(a.objects[i], b.objects[i])) return false;
  }
  for (auto ia = a.behaviors.begin(), ib = b.behaviors.begin(); ia != a.behaviors.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !same_stmt(ia->second.body, ib->second.body)) return false;
  }
  for (auto ia = a.declared_primitives.begin(), ib = b.declared_primitives.begin(); ia != a.declared_primitives.end();
       ++ia, ++ib) {
    if (ia->first != ib->first || !same_expr(ia->second.completion, ib->second.completion)) return false;
  }
  for (std::size_t i = 0; i < a.requirements.size(); ++i) {
    if (!same_expr(a.requirements[i].condition, b.requirements[i].condition)) return false;
  }
  for (std::size_t i = 0; i < a.unsupported.size(); ++i) {
    if (a.unsupported[i].construct != b.unsupported[i].construct) return false;
  }
  return true;
}

const ObjectDecl* ScenarioAST::find_object(const std::string& name) const {
  for (const auto& o : objects) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

ExprPtr make_number(double v, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Number;
  e->number = v;
  e->loc = loc;
  return e;
}

ExprPtr make_bool(bool v, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Boolean;
  e->boolean = v;
  e->loc = loc;
  return e;
}

ExprPtr make_object(std::string name, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::ObjectRef;
  e->name = std::move(name);
  e->loc = loc;
  return e;
}

ExprPtr make_node(ExprKind kind, std::vector<ExprPtr> args, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->args = std::move(args);
  e->loc = loc;
  return e;
}

ExprPtr make_compare(CmpOp op, ExprPtr lhs, ExprPtr rhs, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Compare;
  e->cmp = op;
  e->args = {std::move(lhs), std::move(rhs)};
  e->loc = loc;
  return e;
}

ExprPtr make_property(ExprPtr object, std::string field, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Property;
  e->name = std::move(field);
  e->args = {std::move(object)};
  e->loc = loc;
  return e;
}

ExprPtr make_dist(DistKind kind, std::vector<double> params, int var_id, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Dist;
  e->dist.kind = kind;
  e->dist.params = std::move(params);
  e->dist.var_id = var_id;
  e->loc = loc;
  return e;
}

}  // namespace squery
