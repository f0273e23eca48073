#include "squery/dsl.hpp"

namespace squery {

namespace {

[[noreturn]] void mismatch(const Expr& e, const std::string& what, ExprType found) {
  throw SemanticError("expected " + what + ", found " + type_name(found), e.loc);
}

bool positional(ExprType t) { return t == ExprType::Vector || t == ExprType::Object; }

ExprType need(const ExprPtr& e, ExprType t) {
  const ExprType found = type_of(e);
  if (found != t) mismatch(*e, std::string("a ") + type_name(t), found);
  return found;
}

void need_position(const ExprPtr& e) {
  const ExprType found = type_of(e);
  if (!positional(found)) mismatch(*e, "a vector or object", found);
}

}  // namespace

ExprType type_of(const ExprPtr& ep) {
  const Expr& e = *ep;
  const auto& a = e.args;
  switch (e.kind) {
    case ExprKind::Number:
    case ExprKind::Dist:
      return ExprType::Scalar;
    case ExprKind::Boolean:
    case ExprKind::ChildTerminated:
      return ExprType::Bool;
    case ExprKind::Ident:
      throw SemanticError("unresolved name '" + e.name + "'", e.loc);
    case ExprKind::ObjectRef:
    case ExprKind::SelfRef:
      return ExprType::Object;
    case ExprKind::Property:
      need(a[0], ExprType::Object);
      if (e.name == "position") return ExprType::Vector;
      if (e.name == "heading") return ExprType::Scalar;
      if (e.name == "lane") return ExprType::Region;
      throw SemanticError("unknown property '" + e.name + "'", e.loc);
    case ExprKind::Vector:
      for (const auto& c : a) need(c, ExprType::Scalar);
      return ExprType::Vector;
    case ExprKind::Neg: {
      const ExprType t = type_of(a[0]);
      if (t != ExprType::Scalar && t != ExprType::Vector) mismatch(e, "a scalar or vector", t);
      return t;
    }
    case ExprKind::Add:
    case ExprKind::Sub: {
      const ExprType l = type_of(a[0]);
      const ExprType r = type_of(a[1]);
      if (l == ExprType::Scalar && r == ExprType::Scalar) return ExprType::Scalar;
      if (positional(l) && positional(r)) return ExprType::Vector;
      throw SemanticError(std::string("cannot combine ") + type_name(l) + " and " + type_name(r), e.loc);
    }
    case ExprKind::Mul: {
      const ExprType l = type_of(a[0]);
      const ExprType r = type_of(a[1]);
      if (l == ExprType::Scalar && r == ExprType::Scalar) return ExprType::Scalar;
      if ((l == ExprType::Scalar && r == ExprType::Vector) || (l == ExprType::Vector && r == ExprType::Scalar))
        return ExprType::Vector;
      throw SemanticError(std::string("cannot multiply ") + type_name(l) + " by " + type_name(r), e.loc);
    }
    case ExprKind::Div: {
      const ExprType l = type_of(a[0]);
      need(a[1], ExprType::Scalar);
      if (l != ExprType::Scalar && l != ExprType::Vector) mismatch(e, "a scalar or vector", l);
      return l;
    }
    case ExprKind::Deg:
      return need(a[0], ExprType::Scalar);
    case ExprKind::RelativeTo: {
      const ExprType l = type_of(a[0]);
      const ExprType r = type_of(a[1]);
      if (l == ExprType::Scalar && r == ExprType::Scalar) return ExprType::Scalar;
      if (l == ExprType::Vector && positional(r)) return ExprType::Vector;
      throw SemanticError(std::string("cannot take ") + type_name(l) + " relative to " + type_name(r), e.loc);
    }
    case ExprKind::Distance:
    case ExprKind::AngleTo:
      need_position(a[0]);
      need_position(a[1]);
      return ExprType::Scalar;
    case ExprKind::RelativeHeading:
      for (const auto& x : a) {
        const ExprType t = type_of(x);
        if (t != ExprType::Scalar && t != ExprType::Object) mismatch(*x, "a heading or object", t);
      }
      return ExprType::Scalar;
    case ExprKind::ApparentHeading:
      need(a[0], ExprType::Object);
      need_position(a[1]);
      return ExprType::Scalar;
    case ExprKind::CanSee:
      need(a[0], ExprType::Object);
      need_position(a[1]);
      return ExprType::Bool;
    case ExprKind::In:
      need_position(a[0]);
      need(a[1], ExprType::Region);
      return ExprType::Bool;
    case ExprKind::Not:
      return need(a[0], ExprType::Bool);
    case ExprKind::And:
    case ExprKind::Or:
      need(a[0], ExprType::Bool);
      return need(a[1], ExprType::Bool);
    case ExprKind::Compare:
      need(a[0], ExprType::Scalar);
      need(a[1], ExprType::Scalar);
      return ExprType::Bool;
    case ExprKind::OffsetBy:
      need_position(a[0]);
      need(a[1], ExprType::Vector);
      return ExprType::Vector;
    case ExprKind::OffsetAlongBy:
      need_position(a[0]);
      need(a[1], ExprType::Scalar);
      need(a[2], ExprType::Vector);
      return ExprType::Vector;
    case ExprKind::RegionAll:
    case ExprKind::RegionNamed:
      return ExprType::Region;
    case ExprKind::Visible:
    case ExprKind::NotVisible:
      need(a[0], ExprType::Region);
      need(a[1], ExprType::Object);
      return ExprType::Region;
    case ExprKind::PointNear:
      need_position(a[0]);
      need_position(a[1]);
      return ExprType::Bool;
    case ExprKind::HeadingEq:
      need(a[0], ExprType::Scalar);
      need(a[1], ExprType::Scalar);
      return ExprType::Bool;
    case ExprKind::LocalCoords:
      need_position(a[0]);
      need_position(a[1]);
      need(a[2], ExprType::Scalar);
      return ExprType::Vector;
    case ExprKind::Component:
      need(a[0], ExprType::Vector);
      return ExprType::Scalar;
    case ExprKind::FollowDistance:
      need_position(a[0]);
      need_position(a[1]);
      need(a[2], ExprType::Scalar);
      return ExprType::Bool;
  }
  throw SemanticError("malformed expression", e.loc);
}

}  // namespace squery
