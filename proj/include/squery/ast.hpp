#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "squery/errors.hpp"

namespace squery {

enum class DistKind { Uniform, Range, Normal, TruncatedNormal };

/// Support of a distribution: a closed interval, or a finite point set for
/// discrete Uniform. Unbounded ends are +/-infinity.
struct Support {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> points;  // nonempty only for discrete supports

  bool discrete() const { return !points.empty(); }
  bool bounded() const;
  bool contains(double v) const;
  bool operator==(const Support&) const = default;
};

/// One syntactic distribution occurrence; each one is its own unobserved variable.
struct DistRef {
  DistKind kind = DistKind::Range;
  std::vector<double> params;
  int var_id = -1;

  /// Throws SemanticError on malformed parameters.
  Support support() const;
};

const char* dist_name(DistKind kind);

enum class ExprKind {
  Number,
  Boolean,
  Dist,
  Ident,       // unresolved name, only present before resolution
  ObjectRef,   // program object
  SelfRef,     // the object executing a behavior or being declared
  Property,    // args[0].name ; name in {position, heading, lane}
  Vector,      // 2 or 3 scalar components
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Deg,
  RelativeTo,
  Distance,         // from, to
  AngleTo,          // from, to
  RelativeHeading,  // of, from
  ApparentHeading,  // of, from
  CanSee,
  In,
  Not,
  And,
  Or,
  Compare,
  OffsetBy,       // vector, offset
  OffsetAlongBy,  // vector, heading, offset
  RegionAll,      // every lane of the map
  RegionNamed,    // named map region
  Visible,        // region, viewer
  NotVisible,     // region, viewer
  // Internal forms built from specifiers; never produced by the parser.
  PointNear,        // a, b : 2D points coincide within tolerance
  HeadingEq,        // a, b : headings agree modulo 2*pi within tolerance
  LocalCoords,      // point, origin, heading
  Component,        // vector, index in `number`
  FollowDistance,   // self position, from position, distance
  ChildTerminated,  // termination of the child machine `number`
};

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };
const char* cmp_symbol(CmpOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Number;
  std::vector<ExprPtr> args;
  double number = 0.0;
  bool boolean = false;
  std::string name;
  CmpOp cmp = CmpOp::Lt;
  DistRef dist;
  SourceLoc loc;
};

/// Structural equality ignoring source locations.
bool same_expr(const ExprPtr& a, const ExprPtr& b);

/// Static types of the expression language.
enum class ExprType { Scalar, Bool, Vector, Region, Object };
const char* type_name(ExprType t);

ExprPtr make_number(double v, SourceLoc loc = {});
ExprPtr make_bool(bool v, SourceLoc loc = {});
ExprPtr make_object(std::string name, SourceLoc loc = {});
ExprPtr make_node(ExprKind kind, std::vector<ExprPtr> args, SourceLoc loc = {});
ExprPtr make_compare(CmpOp op, ExprPtr lhs, ExprPtr rhs, SourceLoc loc = {});
ExprPtr make_property(ExprPtr object, std::string field, SourceLoc loc = {});
ExprPtr make_dist(DistKind kind, std::vector<double> params, int var_id, SourceLoc loc = {});

/// Rebuilds `e` bottom-up, replacing nodes for which `fn` returns non-null.
template <typename Fn>
ExprPtr rewrite(const ExprPtr& e, Fn&& fn) {
  if (!e) return e;
  if (ExprPtr r = fn(e)) return r;
  bool changed = false;
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  for (const auto& a : e->args) {
    args.push_back(rewrite(a, fn));
    changed = changed || args.back() != a;
  }
  if (!changed) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->args = std::move(args);
  return copy;
}

/// Visits every node of `e` in pre-order.
template <typename Fn>
void visit(const ExprPtr& e, Fn&& fn) {
  if (!e) return;
  fn(*e);
  for (const auto& a : e->args) visit(a, fn);
}

enum class SpecifierKind {
  At,
  In,
  On,
  OffsetBy,
  Beyond,       // target, offset, [from]
  VisibleFrom,  // viewer
  AheadOf,      // target, [by]
  Behind,       // target, [by]
  Following,    // field, [from], distance
  Facing,
  FacingToward,
  FacingAwayFrom,
  ApparentlyFacing,  // heading, [from]
};

struct Specifier {
  SpecifierKind kind = SpecifierKind::At;
  std::vector<ExprPtr> args;  // absent optional arguments are null
  SourceLoc loc;
};

/// A recognized construct outside the supported fragment.
struct UnsupportedConstruct {
  std::string construct;
  SourceLoc loc;
};

struct ObjectDecl {
  std::string name;
  std::string object_class;
  bool anonymous = false;
  std::vector<Specifier> specifiers;
  std::optional<std::string> behavior;
  std::optional<double> visible_distance;  // meters
  std::optional<double> view_angle;        // full cone angle, radians
  std::vector<UnsupportedConstruct> unsupported;
  SourceLoc loc;
};

enum class StmtKind { Do, Seq, TryInterrupt, Unsupported };

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

/// Behavior statement tree.
///   Do:           `do behavior [until condition]`
///   Seq:          children run one after another
///   TryInterrupt: children[0] is the try body, children[1] the handler
struct Stmt {
  StmtKind kind = StmtKind::Do;
  std::string behavior;
  ExprPtr condition;  // until / interrupt condition; null means never
  std::vector<StmtPtr> children;
  std::string construct;  // for Unsupported
  SourceLoc loc;
};

bool same_stmt(const StmtPtr& a, const StmtPtr& b);

struct BehaviorDef {
  std::string name;
  StmtPtr body;
  SourceLoc loc;
};

struct PrimitiveDecl {
  std::string name;
  ExprPtr completion;  // null: the primitive never completes
  SourceLoc loc;
};

struct Requirement {
  ExprPtr condition;
  SourceLoc loc;
};

struct ScenarioAST {
  std::vector<ObjectDecl> objects;
  std::map<std::string, BehaviorDef> behaviors;
  std::set<std::string> primitive_behaviors;  // primitives referenced anywhere
  std::map<std::string, PrimitiveDecl> declared_primitives;
  std::vector<Requirement> requirements;
  std::vector<UnsupportedConstruct> unsupported;  // top-level constructs
  int variable_count = 0;

  const ObjectDecl* find_object(const std::string& name) const;
  bool is_primitive(const std::string& behavior) const { return primitive_behaviors.count(behavior) > 0; }
};

/// Structural equality ignoring source locations.
bool same_program(const ScenarioAST& a, const ScenarioAST& b);

}  // namespace squery
