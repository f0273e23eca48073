#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "squery/geometry.hpp"

namespace squery {

struct Lane {
  std::string id;
  std::vector<Vec2> centerline;
  Polygon polygon;
  std::optional<std::string> left;
  std::optional<std::string> right;
  std::vector<std::string> successors;

  double length() const { return polyline_length(centerline); }
  /// Traffic direction at the centerline point closest to `p`.
  double direction_at(Vec2 p) const;
};

/// Immutable road network: lanes plus named polygonal regions.
class RoadMap {
 public:
  RoadMap() = default;
  /// Throws ValidationError when lanes are malformed.
  RoadMap(std::vector<Lane> lanes, std::map<std::string, Polygon> regions = {});

  const std::vector<Lane>& lanes() const { return lanes_; }
  const std::map<std::string, Polygon>& regions() const { return regions_; }
  bool empty() const { return lanes_.empty() && regions_.empty(); }

  const Lane* find_lane(const std::string& id) const;
  const Polygon* find_region(const std::string& name) const;
  /// First lane (in declaration order) whose polygon contains `p`.
  const Lane* lane_at(Vec2 p) const;
  BoundingBox bounds() const;

  static RoadMap from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  void validate() const;

  std::vector<Lane> lanes_;
  std::map<std::string, std::size_t> lane_index_;
  std::map<std::string, Polygon> regions_;
};

RoadMap load_map(const std::filesystem::path& path);
void save_map(const RoadMap& map, const std::filesystem::path& path);

/// Straight parallel lanes along +y, ids "Lane1".."LaneN" from left to right.
RoadMap straight_road(int lane_count, double length, double lane_width = 3.5, double start_y = -50.0);

}  // namespace squery
