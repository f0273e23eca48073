#include "squery/guards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace squery {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 0 * inf is 0 in interval products.
double mul0(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

bool finite(Interval a) { return std::isfinite(a.lo) && std::isfinite(a.hi); }

const Interval kAnyAngle{-kPi, kPi};

}  // namespace

Interval Interval::whole() { return {-kInf, kInf}; }

Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

Interval operator*(Interval a, Interval b) {
  const double p[] = {mul0(a.lo, b.lo), mul0(a.lo, b.hi), mul0(a.hi, b.lo), mul0(a.hi, b.hi)};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

Interval abs(Interval a) {
  if (a.lo >= 0) return a;
  if (a.hi <= 0) return -a;
  return {0.0, std::max(-a.lo, a.hi)};
}

Interval sqrt(Interval a) { return {std::sqrt(std::max(0.0, a.lo)), std::sqrt(std::max(0.0, a.hi))}; }

Interval square(Interval a) {
  const Interval m = abs(a);
  return {m.lo * m.lo, m.hi * m.hi};
}

TriState tri_and(TriState a, TriState b) { return {a.can_true && b.can_true, a.can_false || b.can_false}; }
TriState tri_or(TriState a, TriState b) { return {a.can_true || b.can_true, a.can_false && b.can_false}; }
TriState tri_not(TriState a) { return {a.can_false, a.can_true}; }

std::map<int, Support> unobserved_variables(const ExprPtr& e) {
  std::map<int, Support> out;
  visit(e, [&](const Expr& n) {
    if (n.kind == ExprKind::Dist) out.emplace(n.dist.var_id, n.dist.support());
  });
  return out;
}

namespace {

std::uint64_t var_bit(int id) { return std::uint64_t{1} << (static_cast<unsigned>(id) % 64u); }

bool independent(const Value& a, const Value& b) { return (a.vars & b.vars) == 0; }

// Wraps an angle interval into (-pi, pi]; crossing the cut yields the full circle.
std::pair<Interval, bool> wrap_interval(Interval a) {
  if (!finite(a) || a.width() >= kTwoPi) return {kAnyAngle, false};
  const double lo = wrap_angle(a.lo);
  const double hi = lo + a.width();
  if (hi <= kPi) return {{lo, hi}, true};
  return {kAnyAngle, false};
}

bool box_contains_origin(Interval x, Interval y) { return x.contains(0.0) && y.contains(0.0); }

// Headings (0 = +y, counterclockwise) attained by the points of a 2D box.
std::pair<Interval, bool> heading_range(Interval x, Interval y) {
  if (x.degenerate() && y.degenerate()) return {Interval::point(heading_of({x.lo, y.lo})), true};
  if (!finite(x) || !finite(y) || box_contains_origin(x, y)) return {kAnyAngle, false};
  const double ref = heading_of({(x.lo + x.hi) / 2, (y.lo + y.hi) / 2});
  double dmin = kInf, dmax = -kInf;
  for (double cx : {x.lo, x.hi}) {
    for (double cy : {y.lo, y.hi}) {
      const double d = wrap_angle(heading_of({cx, cy}) - ref);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  }
  return wrap_interval({ref + dmin, ref + dmax});
}

// Rotates a box counterclockwise by any angle in `theta`; bounding box of the result.
std::pair<IVec, bool> rotate_box(const IVec& v, Interval theta) {
  IVec out;
  out.z = v.z;
  if (theta.degenerate()) {
    const double c = std::cos(theta.lo), s = std::sin(theta.lo);
    if (v.x.degenerate() && v.y.degenerate()) {
      out.x = Interval::point(v.x.lo * c - v.y.lo * s);
      out.y = Interval::point(v.x.lo * s + v.y.lo * c);
      return {out, true};
    }
    if (!finite(v.x) || !finite(v.y)) return {{Interval::whole(), Interval::whole(), v.z}, false};
    double xl = kInf, xh = -kInf, yl = kInf, yh = -kInf;
    for (double cx : {v.x.lo, v.x.hi}) {
      for (double cy : {v.y.lo, v.y.hi}) {
        const double rx = cx * c - cy * s, ry = cx * s + cy * c;
        xl = std::min(xl, rx), xh = std::max(xh, rx);
        yl = std::min(yl, ry), yh = std::max(yh, ry);
      }
    }
    out.x = {xl, xh};
    out.y = {yl, yh};
    return {out, false};
  }
  // Polar bound: radius range times the swept heading range.
  const Interval r = sqrt(square(v.x) + square(v.y));
  if (!std::isfinite(r.hi) || !finite(theta)) return {{Interval::whole(), Interval::whole(), v.z}, false};
  auto [phi, _] = heading_range(v.x, v.y);
  Interval sweep = phi + theta;
  if (sweep.width() >= kTwoPi) sweep = {-kPi, kPi};
  std::vector<double> angles{sweep.lo, sweep.hi};
  const double step = kPi / 2;
  for (double k = std::ceil(sweep.lo / step); k * step <= sweep.hi; k += 1) angles.push_back(k * step);
  double xl = kInf, xh = -kInf, yl = kInf, yh = -kInf;
  for (double a : angles) {
    for (double rad : {r.lo, r.hi}) {
      const double px = -rad * std::sin(a), py = rad * std::cos(a);
      xl = std::min(xl, px), xh = std::max(xh, px);
      yl = std::min(yl, py), yh = std::max(yh, py);
    }
  }
  out.x = {xl, xh};
  out.y = {yl, yh};
  return {out, false};
}

bool is_convex(const Polygon& poly) {
  int sign = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n], c = poly[(i + 2) % n];
    const double cr = (b - a).cross(c - b);
    if (std::abs(cr) < 1e-12) continue;
    const int s = cr > 0 ? 1 : -1;
    if (sign != 0 && s != sign) return false;
    sign = s;
  }
  return true;
}

TriState polygon_box(const Polygon& poly, Interval x, Interval y) {
  if (x.degenerate() && y.degenerate()) return TriState::of(point_in_polygon({x.lo, y.lo}, poly));
  const BoundingBox bb = bounding_box(poly);
  const bool overlap = x.lo <= bb.max.x && x.hi >= bb.min.x && y.lo <= bb.max.y && y.hi >= bb.min.y;
  bool all_corners = finite(x) && finite(y);
  for (double cx : {x.lo, x.hi}) {
    for (double cy : {y.lo, y.hi}) all_corners = all_corners && point_in_polygon({cx, cy}, poly);
  }
  return {overlap, !(all_corners && is_convex(poly))};
}

TriState cone_box(const ViewCone& cone, Interval x, Interval y) {
  if (x.degenerate() && y.degenerate()) return TriState::of(cone_contains(cone, {x.lo, y.lo}));
  const Interval dx = x - Interval::point(cone.apex.x);
  const Interval dy = y - Interval::point(cone.apex.y);
  const Interval dist = sqrt(square(dx) + square(dy));
  const bool apex_inside = box_contains_origin(dx, dy);
  auto [ang, exact] = heading_range(dx, dy);
  auto [rel, exact2] = wrap_interval(ang - Interval::point(cone.heading));
  const bool angle_in = rel.lo <= cone.half_angle && rel.hi >= -cone.half_angle;
  const bool angle_out = rel.lo < -cone.half_angle || rel.hi > cone.half_angle;
  return {apex_inside || (dist.lo <= cone.range && angle_in), dist.hi > cone.range || angle_out};
}

class Evaluator {
 public:
  Evaluator(const EvalContext& ctx, const VarBox& box) : ctx_(ctx), box_(box) {}

  Value eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Number: return scalar(Interval::point(e.number));
      case ExprKind::Boolean: return truth(TriState::of(e.boolean));
      case ExprKind::Dist: return dist(e);
      case ExprKind::Ident: throw UnsupportedGuard("unresolved name '" + e.name + "'");
      case ExprKind::ObjectRef: return object(e.name);
      case ExprKind::SelfRef:
        if (ctx_.self.empty()) throw UnsupportedGuard("'self' used outside a behavior");
        return object(ctx_.self);
      case ExprKind::Property: return property(e);
      case ExprKind::Vector: return vector(e);
      case ExprKind::Neg: {
        Value a = eval(*e.args[0]);
        if (a.type == ExprType::Vector) {
          a.vec = {-a.vec.x, -a.vec.y, -a.vec.z};
        } else {
          expect(a, ExprType::Scalar, e);
          a.scalar = -a.scalar;
        }
        return a;
      }
      case ExprKind::Add:
      case ExprKind::Sub: return additive(e);
      case ExprKind::Mul: return multiply(e);
      case ExprKind::Div: return divide(e);
      case ExprKind::Deg: {
        Value a = eval(*e.args[0]);
        expect(a, ExprType::Scalar, e);
        a.scalar = a.scalar * Interval::point(kPi / 180.0);
        return a;
      }
      case ExprKind::RelativeTo: return relative_to(e);
      case ExprKind::Distance: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        const IVec p = position(a, e), q = position(b, e);
        const Interval d = sqrt(square(q.x - p.x) + square(q.y - p.y) + square(q.z - p.z));
        return derived(scalar(d), a, b);
      }
      case ExprKind::AngleTo: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        const IVec p = position(a, e), q = position(b, e);
        auto [h, exact] = heading_range(q.x - p.x, q.y - p.y);
        Value v = derived(scalar(h), a, b);
        v.exact = v.exact && exact;
        return v;
      }
      case ExprKind::RelativeHeading: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        auto [h, exact] = wrap_interval(heading(a, e) - heading(b, e));
        Value v = derived(scalar(h), a, b);
        v.exact = v.exact && exact;
        return v;
      }
      case ExprKind::ApparentHeading: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        expect(a, ExprType::Object, e);
        const IVec p = position(b, e), q = position(a, e);
        auto [bearing, exact1] = heading_range(q.x - p.x, q.y - p.y);
        auto [h, exact2] = wrap_interval(heading(a, e) - bearing);
        Value v = derived(scalar(h), a, b);
        v.exact = v.exact && exact1 && exact2;
        return v;
      }
      case ExprKind::CanSee: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        expect(a, ExprType::Object, e);
        const IVec p = position(b, e);
        return derived(truth(cone_box(cone_of(a), p.x, p.y)), a, b);
      }
      case ExprKind::In: {
        const Value a = eval(*e.args[0]), r = eval(*e.args[1]);
        expect(r, ExprType::Region, e);
        const IVec p = position(a, e);
        return derived(truth(region_box(r.region, p.x, p.y)), a, r);
      }
      case ExprKind::Not: {
        Value a = eval(*e.args[0]);
        expect(a, ExprType::Bool, e);
        a.truth = tri_not(a.truth);
        return a;
      }
      case ExprKind::And:
      case ExprKind::Or: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        expect(a, ExprType::Bool, e);
        expect(b, ExprType::Bool, e);
        const TriState t = e.kind == ExprKind::And ? tri_and(a.truth, b.truth) : tri_or(a.truth, b.truth);
        return derived(truth(t), a, b);
      }
      case ExprKind::Compare: return compare(e);
      case ExprKind::OffsetBy: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        const IVec p = position(a, e);
        expect(b, ExprType::Vector, e);
        return derived(vec({p.x + b.vec.x, p.y + b.vec.y, p.z + b.vec.z}), a, b);
      }
      case ExprKind::OffsetAlongBy: {
        const Value a = eval(*e.args[0]), h = eval(*e.args[1]), off = eval(*e.args[2]);
        const IVec p = position(a, e);
        expect(off, ExprType::Vector, e);
        auto [r, exact] = rotate_box(off.vec, heading(h, e));
        Value v = derived(derived(vec({p.x + r.x, p.y + r.y, p.z + r.z}), a, h), v_identity(), off);
        v.exact = v.exact && exact && independent(a, h) && independent(h, off);
        return v;
      }
      case ExprKind::RegionAll: {
        Value v = region();
        require_map();
        for (const Lane& lane : ctx_.map->lanes()) v.region.polygons.push_back(&lane.polygon);
        return v;
      }
      case ExprKind::RegionNamed: {
        require_map();
        const Polygon* poly = ctx_.map->find_region(e.name);
        if (!poly) throw MissingFeature("map has no region named '" + e.name + "'");
        Value v = region();
        v.region.polygons.push_back(poly);
        return v;
      }
      case ExprKind::Visible:
      case ExprKind::NotVisible: {
        Value r = eval(*e.args[0]);
        const Value viewer = eval(*e.args[1]);
        expect(r, ExprType::Region, e);
        expect(viewer, ExprType::Object, e);
        r.region.filters.emplace_back(cone_of(viewer), e.kind == ExprKind::Visible);
        return r;
      }
      case ExprKind::PointNear: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        const IVec p = position(a, e), q = position(b, e);
        const Interval d = sqrt(square(p.x - q.x) + square(p.y - q.y));
        const double tol = ctx_.position_tolerance;
        return derived(truth({d.lo <= tol, d.hi > tol}), a, b);
      }
      case ExprKind::HeadingEq: {
        const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
        return derived(truth(heading_eq(heading(a, e) - heading(b, e))), a, b);
      }
      case ExprKind::LocalCoords: {
        const Value p = eval(*e.args[0]), o = eval(*e.args[1]), h = eval(*e.args[2]);
        const IVec pp = position(p, e), oo = position(o, e);
        const IVec d{pp.x - oo.x, pp.y - oo.y, pp.z - oo.z};
        auto [r, exact] = rotate_box(d, -heading(h, e));
        Value v = derived(derived(vec(r), p, o), v_identity(), h);
        v.exact = v.exact && exact && independent(p, h) && independent(o, h);
        return v;
      }
      case ExprKind::Component: {
        Value a = eval(*e.args[0]);
        expect(a, ExprType::Vector, e);
        const int idx = static_cast<int>(e.number);
        const Interval c = idx == 0 ? a.vec.x : idx == 1 ? a.vec.y : a.vec.z;
        Value v = scalar(c);
        v.exact = a.exact;
        v.vars = a.vars;
        return v;
      }
      case ExprKind::FollowDistance: return follow_distance(e);
      case ExprKind::ChildTerminated: throw UnsupportedGuard("termination predicates are not input guards");
    }
    throw UnsupportedGuard("unknown expression kind");
  }

 private:
  const EvalContext& ctx_;
  const VarBox& box_;

  static Value scalar(Interval i) {
    Value v;
    v.type = ExprType::Scalar;
    v.scalar = i;
    return v;
  }
  static Value truth(TriState t) {
    Value v;
    v.type = ExprType::Bool;
    v.truth = t;
    return v;
  }
  static Value vec(IVec p) {
    Value v;
    v.type = ExprType::Vector;
    v.vec = p;
    return v;
  }
  static Value region() {
    Value v;
    v.type = ExprType::Region;
    return v;
  }
  static Value v_identity() { return Value{}; }

  // Marks `out` as computed from `a` and `b`; exact only if both are exact and share no variable.
  static Value derived(Value out, const Value& a, const Value& b) {
    out.exact = out.exact && a.exact && b.exact && independent(a, b);
    out.vars |= a.vars | b.vars;
    return out;
  }

  [[noreturn]] static void type_error(const Value& v, const char* want, const Expr& at) {
    throw UnsupportedGuard(std::string("expected ") + want + ", found " + type_name(v.type) + " at line " +
                           std::to_string(at.loc.line));
  }
  static void expect(const Value& v, ExprType t, const Expr& at) {
    if (v.type != t) type_error(v, type_name(t), at);
  }

  void require_map() const {
    if (!ctx_.map) throw MissingFeature("expression needs a road map");
  }

  Value dist(const Expr& e) {
    Value v;
    v.type = ExprType::Scalar;
    v.vars = var_bit(e.dist.var_id);
    auto it = box_.find(e.dist.var_id);
    if (it != box_.end()) {
      v.scalar = it->second;
      return v;
    }
    const Support s = e.dist.support();
    v.scalar = {s.lo, s.hi};
    v.exact = s.points.size() <= 1;
    return v;
  }

  Value object(const std::string& name) {
    if (!ctx_.scene) throw MissingFeature("no scene to evaluate against");
    std::string id = name;
    if (ctx_.corr) {
      const std::string* t = ctx_.corr->target(name);
      if (!t) throw MissingFeature("program object '" + name + "' has no corresponding trace object");
      id = *t;
    }
    const ObjectState* st = ctx_.scene->find(id);
    if (!st) {
      throw MissingFeature("object '" + id + "' is not observed at frame " + std::to_string(ctx_.scene->index));
    }
    Value v;
    v.type = ExprType::Object;
    v.object = name;
    v.state = st;
    return v;
  }

  Value property(const Expr& e) {
    const Value o = eval(*e.args[0]);
    expect(o, ExprType::Object, e);
    if (e.name == "position") return vec(IVec::point(o.state->position));
    if (e.name == "heading") return scalar(Interval::point(wrap_angle(o.state->heading)));
    if (e.name == "lane") {
      if (!o.state->lane) throw MissingFeature("lane of object '" + o.object + "' is not observed");
      require_map();
      const Lane* lane = ctx_.map->find_lane(*o.state->lane);
      if (!lane) throw MissingFeature("map has no lane '" + *o.state->lane + "'");
      Value v = region();
      v.region.polygons.push_back(&lane->polygon);
      return v;
    }
    throw UnsupportedGuard("unknown property '" + e.name + "'");
  }

  Value vector(const Expr& e) {
    Value out = vec({});
    Interval comps[3] = {Interval::point(0), Interval::point(0), Interval::point(0)};
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      const Value c = eval(*e.args[i]);
      expect(c, ExprType::Scalar, e);
      comps[i] = c.scalar;
      out.exact = out.exact && c.exact && (out.vars & c.vars) == 0;
      out.vars |= c.vars;
    }
    out.vec = {comps[0], comps[1], comps[2]};
    return out;
  }

  IVec position(const Value& v, const Expr& at) {
    if (v.type == ExprType::Object) return IVec::point(v.state->position);
    if (v.type == ExprType::Vector) return v.vec;
    type_error(v, "a vector or object", at);
  }

  Interval heading(const Value& v, const Expr& at) {
    if (v.type == ExprType::Object) return Interval::point(wrap_angle(v.state->heading));
    if (v.type == ExprType::Scalar) return v.scalar;
    type_error(v, "a heading or object", at);
  }

  ViewCone cone_of(const Value& viewer) const {
    ViewParams p;
    if (ctx_.view) {
      auto it = ctx_.view->find(viewer.object);
      if (it != ctx_.view->end()) p = it->second;
    }
    return {viewer.state->position.xy(), viewer.state->heading, p.half_angle, p.range};
  }

  static TriState region_box(const RegionValue& r, Interval x, Interval y) {
    TriState in{false, true};
    for (const Polygon* poly : r.polygons) in = tri_or(in, polygon_box(*poly, x, y));
    for (const auto& [cone, keep] : r.filters) {
      const TriState c = cone_box(cone, x, y);
      in = tri_and(in, keep ? c : tri_not(c));
    }
    if (x.degenerate() && y.degenerate()) return TriState::of(in.can_true);
    return in;
  }

  TriState heading_eq(Interval d) const {
    const double tol = ctx_.heading_tolerance;
    if (!finite(d)) return {true, true};
    const bool can_true = std::ceil((d.lo - tol) / kTwoPi) <= std::floor((d.hi + tol) / kTwoPi);
    const double k = std::round((d.lo + d.hi) / 2 / kTwoPi);
    const bool within = d.lo >= k * kTwoPi - tol && d.hi <= k * kTwoPi + tol;
    return {can_true, !within};
  }

  Value additive(const Expr& e) {
    const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
    const bool add = e.kind == ExprKind::Add;
    if (a.type == ExprType::Scalar && b.type == ExprType::Scalar)
      return derived(scalar(add ? a.scalar + b.scalar : a.scalar - b.scalar), a, b);
    const IVec p = position(a, e), q = position(b, e);
    if (add) return derived(vec({p.x + q.x, p.y + q.y, p.z + q.z}), a, b);
    return derived(vec({p.x - q.x, p.y - q.y, p.z - q.z}), a, b);
  }

  Value multiply(const Expr& e) {
    Value a = eval(*e.args[0]), b = eval(*e.args[1]);
    if (a.type == ExprType::Scalar && b.type == ExprType::Scalar) return derived(scalar(a.scalar * b.scalar), a, b);
    if (a.type == ExprType::Vector) std::swap(a, b);
    expect(a, ExprType::Scalar, e);
    expect(b, ExprType::Vector, e);
    Value v = derived(vec({a.scalar * b.vec.x, a.scalar * b.vec.y, a.scalar * b.vec.z}), a, b);
    // A shared factor correlates the components.
    v.exact = v.exact && (a.scalar.degenerate() || b.vec.degenerate());
    return v;
  }

  Value divide(const Expr& e) {
    const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
    expect(b, ExprType::Scalar, e);
    const Interval d = b.scalar;
    Interval inv;
    bool exact = true;
    if (d.lo == 0.0 && d.hi == 0.0) throw DomainError("division by zero");
    if (d.contains(0.0)) {
      inv = Interval::whole();
      exact = false;
    } else {
      inv = {1.0 / d.hi, 1.0 / d.lo};
    }
    Value v;
    if (a.type == ExprType::Scalar) {
      v = derived(scalar(a.scalar * inv), a, b);
    } else {
      expect(a, ExprType::Vector, e);
      v = derived(vec({a.vec.x * inv, a.vec.y * inv, a.vec.z * inv}), a, b);
      exact = exact && (d.degenerate() || a.vec.degenerate());
    }
    v.exact = v.exact && exact;
    return v;
  }

  Value relative_to(const Expr& e) {
    const Value a = eval(*e.args[0]), b = eval(*e.args[1]);
    if (a.type == ExprType::Scalar && b.type == ExprType::Scalar) return derived(scalar(a.scalar + b.scalar), a, b);
    expect(a, ExprType::Vector, e);
    if (b.type == ExprType::Object) {
      auto [r, exact] = rotate_box(a.vec, Interval::point(b.state->heading));
      const Vec3 o = b.state->position;
      Value v = derived(vec({r.x + Interval::point(o.x), r.y + Interval::point(o.y), r.z + Interval::point(o.z)}), a, b);
      v.exact = v.exact && exact;
      return v;
    }
    expect(b, ExprType::Vector, e);
    return derived(vec({a.vec.x + b.vec.x, a.vec.y + b.vec.y, a.vec.z + b.vec.z}), a, b);
  }

  Value compare(const Expr& e) {
    const Value l = eval(*e.args[0]), r = eval(*e.args[1]);
    expect(l, ExprType::Scalar, e);
    expect(r, ExprType::Scalar, e);
    const double a = l.scalar.lo, b = l.scalar.hi, c = r.scalar.lo, d = r.scalar.hi;
    const double tol = ctx_.equality_tolerance;
    TriState t;
    switch (e.cmp) {
      case CmpOp::Lt: t = {a < d, b >= c}; break;
      case CmpOp::Le: t = {a <= d, b > c}; break;
      case CmpOp::Gt: t = {b > c, a <= d}; break;
      case CmpOp::Ge: t = {b >= c, a < d}; break;
      case CmpOp::Eq: t = {a <= d + tol && c <= b + tol, b - c > tol || d - a > tol}; break;
      case CmpOp::Ne: t = {b - c > tol || d - a > tol, a <= d + tol && c <= b + tol}; break;
    }
    return derived(truth(t), l, r);
  }

  Value follow_distance(const Expr& e) {
    const Value s = eval(*e.args[0]), f = eval(*e.args[1]), dv = eval(*e.args[2]);
    expect(dv, ExprType::Scalar, e);
    const IVec sp = position(s, e), fp = position(f, e);
    Value out = derived(derived(truth({true, true}), s, f), v_identity(), dv);
    if (!(sp.x.degenerate() && sp.y.degenerate() && fp.x.degenerate() && fp.y.degenerate())) {
      out.exact = false;
      return out;
    }
    require_map();
    const double tol = ctx_.position_tolerance;
    const Interval d = dv.scalar;
    const Vec2 self{sp.x.lo, sp.y.lo}, from{fp.x.lo, fp.y.lo};
    const Lane* start = ctx_.map->lane_at(from);
    std::vector<double> arcs;
    if (start) {
      const PolylineProjection p0 = project_onto(start->centerline, from);
      struct Item {
        const Lane* lane;
        double offset;
      };
      std::vector<Item> stack{{start, -p0.arc_length}};
      std::map<std::string, double> best;  // smallest offset seen per lane
      while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        auto [pos, fresh] = best.emplace(it.lane->id, it.offset);
        if (!fresh) {
          if (pos->second <= it.offset) continue;
          pos->second = it.offset;
        }
        const double len = it.lane->length();
        const PolylineProjection p = project_onto(it.lane->centerline, self);
        const bool along = p.arc_length >= -tol && p.arc_length <= len + tol;
        const bool lateral = std::abs(p.lateral - p0.lateral) <= tol && std::abs(p.distance - std::abs(p.lateral)) <= tol;
        const double arc = it.offset + p.arc_length;
        if (along && lateral && arc >= -tol) arcs.push_back(arc);
        const double next = it.offset + len;
        if (next <= d.hi + tol) {
          for (const auto& succ : it.lane->successors) {
            if (const Lane* l = ctx_.map->find_lane(succ)) stack.push_back({l, next});
          }
        }
      }
    }
    bool can_true = false, pinned = false;
    for (double arc : arcs) {
      if (arc >= d.lo - tol && arc <= d.hi + tol) can_true = true;
      if (d.width() <= 2 * tol && std::abs(arc - (d.lo + d.hi) / 2) <= tol) pinned = true;
    }
    out.truth = {can_true, !pinned};
    return out;
  }
};

}  // namespace

Value eval_expr(const ExprPtr& e, const EvalContext& ctx, const VarBox& box) {
  return Evaluator(ctx, box).eval(*e);
}

namespace {

TriState evaluate_box(const ExprPtr& g, const EvalContext& ctx, const VarBox& box, bool* exact) {
  const Value v = Evaluator(ctx, box).eval(*g);
  if (v.type != ExprType::Bool) throw UnsupportedGuard(std::string("guard is ") + type_name(v.type) + ", not boolean");
  if (exact) *exact = v.exact;
  return v.truth;
}

}  // namespace

TriState guard_sat(const Guard& g, const EvalContext& ctx, const GuardOptions& options) {
  std::vector<std::pair<int, const Support*>> discrete, continuous;
  for (const auto& [id, s] : g.unobserved) {
    if (s.discrete() && s.points.size() > 1) {
      discrete.emplace_back(id, &s);
    } else if (s.bounded() && s.lo < s.hi) {
      continuous.emplace_back(id, &s);
    }
  }
  double combos = 1;
  for (const auto& [_, s] : discrete) combos *= static_cast<double>(s->points.size());
  if (combos > options.max_discrete_combinations) discrete.clear();  // fall back to hulls

  TriState acc;
  VarBox box;
  std::vector<std::size_t> digit(discrete.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < discrete.size(); ++i) box[discrete[i].first] = Interval::point(discrete[i].second->points[digit[i]]);
    bool exact = true;
    TriState t = evaluate_box(g.predicate, ctx, box, &exact);
    if (!exact && t.can_true && t.can_false && !continuous.empty()) {
      // Split every continuous variable uniformly and take the union of the pieces.
      const std::size_t n = continuous.size();
      int k = static_cast<int>(std::floor(std::pow(static_cast<double>(options.max_boxes), 1.0 / static_cast<double>(n)) + 1e-9));
      k = std::clamp(k, 1, options.subdivisions_per_variable);
      std::size_t split = n;
      if (k < 2) {
        k = 2;
        split = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(options.max_boxes))));
        split = std::min(split, n);
      }
      t = TriState{};
      std::vector<int> idx(split, 0);
      while (true) {
        for (std::size_t i = 0; i < split; ++i) {
          const Support& s = *continuous[i].second;
          const double w = (s.hi - s.lo) / k;
          const double lo = s.lo + w * idx[i];
          const double hi = idx[i] == k - 1 ? s.hi : s.lo + w * (idx[i] + 1);
          box[continuous[i].first] = {lo, hi};
        }
        const TriState piece = evaluate_box(g.predicate, ctx, box, nullptr);
        t.can_true = t.can_true || piece.can_true;
        t.can_false = t.can_false || piece.can_false;
        if (t.can_true && t.can_false) break;
        std::size_t i = 0;
        while (i < split && ++idx[i] == k) idx[i++] = 0;
        if (i == split) break;
      }
      for (std::size_t i = 0; i < split; ++i) box.erase(continuous[i].first);
    }
    acc.can_true = acc.can_true || t.can_true;
    acc.can_false = acc.can_false || t.can_false;
    if (acc.can_true && acc.can_false) break;
    std::size_t i = 0;
    while (i < discrete.size() && ++digit[i] == discrete[i].second->points.size()) digit[i++] = 0;
    if (i == discrete.size()) break;
  }
  return acc;
}

TriState guard_sat(const ExprPtr& g, const EvalContext& ctx, const GuardOptions& options) {
  return guard_sat(Guard(g), ctx, options);
}

}  // namespace squery
