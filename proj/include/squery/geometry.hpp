#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace squery {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec2 xy() const { return {x, y}; }
  bool operator==(const Vec3&) const = default;
};

inline double distance(Vec3 a, Vec3 b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// Headings follow the convention 0 = facing +y, counterclockwise positive.
inline Vec2 heading_vector(double heading) { return {-std::sin(heading), std::cos(heading)}; }

/// Heading of a direction vector. Throws DomainError for the zero vector.
double heading_of(Vec2 direction);

/// Coordinates of `p` in the frame anchored at `origin` facing `heading`
/// (x to the right, y forward).
Vec2 to_local(Vec2 p, Vec2 origin, double heading);
Vec2 from_local(Vec2 local, Vec2 origin, double heading);

using Polygon = std::vector<Vec2>;

/// Closed containment: points on the boundary count as inside.
bool point_in_polygon(Vec2 p, const Polygon& poly, double eps = 1e-9);
bool polygon_is_simple(const Polygon& poly);
double polygon_area(const Polygon& poly);

struct BoundingBox {
  Vec2 min;
  Vec2 max;
};
BoundingBox bounding_box(const Polygon& poly);

struct ViewCone {
  Vec2 apex;
  double heading = 0.0;
  double half_angle = kPi / 4.0;
  double range = 50.0;
};

/// Closed sector test; the apex itself is inside.
bool cone_contains(const ViewCone& cone, Vec2 target);

/// Arc-length parameterized polyline queries.
struct PolylineProjection {
  double arc_length = 0.0;  // along the polyline to the closest point
  double lateral = 0.0;     // signed, positive to the left of travel
  double distance = 0.0;    // unsigned distance to the polyline
  std::size_t segment = 0;
};

double polyline_length(const std::vector<Vec2>& line);
PolylineProjection project_onto(const std::vector<Vec2>& line, Vec2 p);
Vec2 point_at(const std::vector<Vec2>& line, double arc_length);
double heading_at(const std::vector<Vec2>& line, double arc_length);

}  // namespace squery
