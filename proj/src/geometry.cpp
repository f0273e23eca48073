#include "squery/geometry.hpp"

#include <algorithm>
#include <limits>

#include "squery/errors.hpp"

namespace squery {

double wrap_angle(double a) {
  if (!std::isfinite(a)) return a;
  double r = std::fmod(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

double heading_of(Vec2 d) {
  if (d.x == 0.0 && d.y == 0.0) throw DomainError("heading of the zero vector is undefined");
  return std::atan2(-d.x, d.y);
}

Vec2 to_local(Vec2 p, Vec2 origin, double heading) {
  const Vec2 d = p - origin;
  const double c = std::cos(heading), s = std::sin(heading);
  return {d.x * c + d.y * s, -d.x * s + d.y * c};
}

Vec2 from_local(Vec2 local, Vec2 origin, double heading) {
  const double c = std::cos(heading), s = std::sin(heading);
  return {origin.x + local.x * c - local.y * s, origin.y + local.x * s + local.y * c};
}

namespace {

bool on_segment(Vec2 p, Vec2 a, Vec2 b, double eps) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return (p - a).norm() <= eps;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm() <= eps;
}

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = (b - a).cross(c - a);
  if (std::abs(v) < 1e-12) return 0;
  return v > 0 ? 1 : -1;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2, 1e-12)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2, 1e-12)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2, 1e-12)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2, 1e-12)) return true;
  return false;
}

}  // namespace

bool point_in_polygon(Vec2 p, const Polygon& poly, double eps) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if (on_segment(p, a, b, eps)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool polygon_is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a1 = poly[i], a2 = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex by construction
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      const Vec2 b1 = poly[j], b2 = poly[(j + 1) % n];
      if (segments_intersect(a1, a2, b1, b2)) return false;
    }
  }
  return std::abs(polygon_area(poly)) > 0.0;
}

double polygon_area(const Polygon& poly) {
  double area = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) area += poly[i].cross(poly[(i + 1) % n]);
  return area / 2.0;
}

BoundingBox bounding_box(const Polygon& poly) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundingBox box{{inf, inf}, {-inf, -inf}};
  for (const Vec2& p : poly) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.y = std::min(box.min.y, p.y);
    box.max.x = std::max(box.max.x, p.x);
    box.max.y = std::max(box.max.y, p.y);
  }
  return box;
}

bool cone_contains(const ViewCone& cone, Vec2 target) {
  const Vec2 d = target - cone.apex;
  const double dist = d.norm();
  if (dist > cone.range) return false;
  if (dist == 0.0) return true;
  const double off = wrap_angle(heading_of(d) - cone.heading);
  return std::abs(off) <= cone.half_angle + 1e-12;
}

double polyline_length(const std::vector<Vec2>& line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) len += (line[i] - line[i - 1]).norm();
  return len;
}

PolylineProjection project_onto(const std::vector<Vec2>& line, Vec2 p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double offset = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec2 a = line[i - 1], b = line[i];
    const Vec2 ab = b - a;
    const double len = ab.norm();
    if (len == 0.0) continue;
    const double t = std::clamp((p - a).dot(ab) / (len * len), 0.0, 1.0);
    const Vec2 closest = a + ab * t;
    const double dist = (p - closest).norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.arc_length = offset + t * len;
      best.lateral = ab.cross(p - a) / len;
      best.segment = i - 1;
    }
    offset += len;
  }
  return best;
}

Vec2 point_at(const std::vector<Vec2>& line, double s) {
  if (line.empty()) return {};
  if (line.size() == 1) return line.front();
  double offset = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec2 a = line[i - 1], b = line[i];
    const double len = (b - a).norm();
    if (s <= offset + len || i + 1 == line.size()) {
      if (len == 0.0) return a;
      // past the end we extrapolate along the last segment
      return a + (b - a) * ((s - offset) / len);
    }
    offset += len;
  }
  return line.back();
}

double heading_at(const std::vector<Vec2>& line, double s) {
  if (line.size() < 2) return 0.0;
  double offset = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec2 a = line[i - 1], b = line[i];
    const double len = (b - a).norm();
    if ((s <= offset + len || i + 1 == line.size()) && len > 0.0) return heading_of(b - a);
    offset += len;
  }
  return heading_of(line.back() - line[line.size() - 2]);
}

}  // namespace squery
