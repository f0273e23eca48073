#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "squery/ast.hpp"
#include "squery/geometry.hpp"
#include "squery/road_map.hpp"
#include "squery/scene.hpp"

namespace squery {

/// Closed real interval; either end may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double v) { return {v, v}; }
  static Interval whole();
  bool degenerate() const { return lo == hi; }
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Interval&) const = default;
};

Interval operator+(Interval a, Interval b);
Interval operator-(Interval a, Interval b);
Interval operator-(Interval a);
Interval operator*(Interval a, Interval b);
Interval hull(Interval a, Interval b);
/// Range of |x| over `a`.
Interval abs(Interval a);
Interval sqrt(Interval a);
Interval square(Interval a);

struct TriState {
  bool can_true = false;
  bool can_false = false;

  static TriState of(bool v) { return {v, !v}; }
  bool definitely_true() const { return can_true && !can_false; }
  bool definitely_false() const { return can_false && !can_true; }
  bool operator==(const TriState&) const = default;
};

TriState tri_and(TriState a, TriState b);
TriState tri_or(TriState a, TriState b);
TriState tri_not(TriState a);

/// Axis-aligned box of points; two-component vectors carry z = 0.
struct IVec {
  Interval x;
  Interval y;
  Interval z;

  static IVec point(Vec3 p) { return {Interval::point(p.x), Interval::point(p.y), Interval::point(p.z)}; }
  bool degenerate() const { return x.degenerate() && y.degenerate() && z.degenerate(); }
};

/// View cone parameters of one program object.
struct ViewParams {
  double half_angle = kPi / 4.0;
  double range = 50.0;
};

/// Union of polygons, optionally filtered by view cones (keep inside or outside).
struct RegionValue {
  std::vector<const Polygon*> polygons;
  std::vector<std::pair<ViewCone, bool>> filters;
};

/// Result of evaluating an expression over a box of unobserved variables.
struct Value {
  ExprType type = ExprType::Scalar;
  Interval scalar;
  IVec vec;
  TriState truth;
  std::string object;  // program object name
  const ObjectState* state = nullptr;
  RegionValue region;
  bool exact = true;      // the value is the exact attainable range
  std::uint64_t vars = 0;  // unobserved variables involved, hashed into 64 bits
};

struct EvalContext {
  const Scene* scene = nullptr;
  const Correspondence* corr = nullptr;
  const RoadMap* map = nullptr;
  const std::map<std::string, ViewParams>* view = nullptr;  // by program object
  std::string self;  // program object bound to `self`
  double position_tolerance = 1e-9;
  double heading_tolerance = 1e-9;
  double equality_tolerance = 1e-9;
};

/// Per-variable value ranges; variables absent from the box use their full support.
using VarBox = std::map<int, Interval>;

/// Evaluates `e` with every unobserved variable ranging over its support (or
/// over `box` when given). Throws MissingFeature, DomainError, UnsupportedGuard.
Value eval_expr(const ExprPtr& e, const EvalContext& ctx, const VarBox& box = {});

struct GuardOptions {
  int subdivisions_per_variable = 64;
  int max_boxes = 4096;
  int max_discrete_combinations = 4096;
};

/// Unobserved variables of `e` with their supports.
std::map<int, Support> unobserved_variables(const ExprPtr& e);

/// A boolean predicate together with its unobserved variables.
struct Guard {
  ExprPtr predicate;
  std::map<int, Support> unobserved;

  Guard() = default;
  explicit Guard(ExprPtr p) : predicate(std::move(p)), unobserved(unobserved_variables(predicate)) {}
};

/// Which truth values of the guard are attainable for some assignment of its
/// unobserved variables within their supports.
TriState guard_sat(const Guard& g, const EvalContext& ctx, const GuardOptions& options = {});
TriState guard_sat(const ExprPtr& g, const EvalContext& ctx, const GuardOptions& options = {});

}  // namespace squery
