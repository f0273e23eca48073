#include "squery/road_map.hpp"

#include <fstream>
#include <limits>

#include "squery/errors.hpp"

namespace squery {

using nlohmann::json;

double Lane::direction_at(Vec2 p) const {
  const PolylineProjection proj = project_onto(centerline, p);
  return heading_at(centerline, proj.arc_length);
}

RoadMap::RoadMap(std::vector<Lane> lanes, std::map<std::string, Polygon> regions)
    : lanes_(std::move(lanes)), regions_(std::move(regions)) {
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    if (!lane_index_.emplace(lanes_[i].id, i).second)
      throw ValidationError("duplicate lane id '" + lanes_[i].id + "'");
  }
  validate();
}

void RoadMap::validate() const {
  for (const Lane& lane : lanes_) {
    if (lane.centerline.size() < 2)
      throw ValidationError("lane '" + lane.id + "' centerline needs at least two points");
    if (!polygon_is_simple(lane.polygon))
      throw ValidationError("lane '" + lane.id + "' polygon is not simple");
    for (const Vec2& p : lane.centerline) {
      if (!point_in_polygon(p, lane.polygon, 1e-6))
        throw ValidationError("lane '" + lane.id + "' centerline leaves its polygon");
    }
    auto check_neighbor = [&](const std::optional<std::string>& other, bool left) {
      if (!other) return;
      const Lane* n = find_lane(*other);
      if (!n) throw ValidationError("lane '" + lane.id + "' references unknown lane '" + *other + "'");
      const auto& back = left ? n->right : n->left;
      if (back != lane.id)
        throw ValidationError("lane adjacency between '" + lane.id + "' and '" + *other + "' is not symmetric");
    };
    check_neighbor(lane.left, true);
    check_neighbor(lane.right, false);
    for (const auto& s : lane.successors) {
      if (!find_lane(s))
        throw ValidationError("lane '" + lane.id + "' has unknown successor '" + s + "'");
    }
  }
  for (const auto& [name, poly] : regions_) {
    if (!polygon_is_simple(poly)) throw ValidationError("region '" + name + "' is not a simple polygon");
  }
}

const Lane* RoadMap::find_lane(const std::string& id) const {
  auto it = lane_index_.find(id);
  return it == lane_index_.end() ? nullptr : &lanes_[it->second];
}

const Polygon* RoadMap::find_region(const std::string& name) const {
  auto it = regions_.find(name);
  return it == regions_.end() ? nullptr : &it->second;
}

const Lane* RoadMap::lane_at(Vec2 p) const {
  for (const Lane& lane : lanes_) {
    if (point_in_polygon(p, lane.polygon)) return &lane;
  }
  return nullptr;
}

BoundingBox RoadMap::bounds() const {
  Polygon all;
  for (const Lane& lane : lanes_) all.insert(all.end(), lane.polygon.begin(), lane.polygon.end());
  for (const auto& [_, poly] : regions_) all.insert(all.end(), poly.begin(), poly.end());
  return bounding_box(all);
}

namespace {

std::vector<Vec2> points_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + " must be an array of [x, y] points");
  std::vector<Vec2> pts;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() < 2 || !p[0].is_number() || !p[1].is_number())
      throw FormatError(what + " must contain [x, y] number pairs");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

json points_to_json(const std::vector<Vec2>& pts) {
  json arr = json::array();
  for (const Vec2& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

std::optional<std::string> optional_id(const json& lane, const char* key) {
  auto it = lane.find(key);
  if (it == lane.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw FormatError(std::string("lane field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

}  // namespace

RoadMap RoadMap::from_json(const json& j) {
  if (!j.is_object()) throw FormatError("map must be a JSON object");
  std::vector<Lane> lanes;
  if (auto it = j.find("lanes"); it != j.end()) {
    if (!it->is_array()) throw FormatError("'lanes' must be an array");
    for (const auto& lj : *it) {
      if (!lj.is_object() || !lj.contains("id") || !lj["id"].is_string())
        throw FormatError("every lane needs a string 'id'");
      Lane lane;
      lane.id = lj["id"].get<std::string>();
      if (!lj.contains("centerline") || !lj.contains("polygon"))
        throw FormatError("lane '" + lane.id + "' needs 'centerline' and 'polygon'");
      lane.centerline = points_from_json(lj["centerline"], "centerline");
      lane.polygon = points_from_json(lj["polygon"], "polygon");
      lane.left = optional_id(lj, "left");
      lane.right = optional_id(lj, "right");
      if (auto s = lj.find("successors"); s != lj.end() && !s->is_null()) {
        if (!s->is_array()) throw FormatError("'successors' must be an array");
        for (const auto& id : *s) {
          if (!id.is_string()) throw FormatError("successor ids must be strings");
          lane.successors.push_back(id.get<std::string>());
        }
      }
      lanes.push_back(std::move(lane));
    }
  }
  std::map<std::string, Polygon> regions;
  if (auto it = j.find("regions"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw FormatError("'regions' must be an object of name -> polygon");
    for (const auto& [name, poly] : it->items()) regions[name] = points_from_json(poly, "region " + name);
  }
  return RoadMap(std::move(lanes), std::move(regions));
}

json RoadMap::to_json() const {
  json lanes = json::array();
  for (const Lane& lane : lanes_) {
    json lj;
    lj["id"] = lane.id;
    lj["centerline"] = points_to_json(lane.centerline);
    lj["polygon"] = points_to_json(lane.polygon);
    lj["left"] = lane.left ? json(*lane.left) : json(nullptr);
    lj["right"] = lane.right ? json(*lane.right) : json(nullptr);
    lj["successors"] = lane.successors;
    lanes.push_back(std::move(lj));
  }
  json j;
  j["lanes"] = std::move(lanes);
  json regions = json::object();
  for (const auto& [name, poly] : regions_) regions[name] = points_to_json(poly);
  j["regions"] = std::move(regions);
  return j;
}

RoadMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open map file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("map " + path.string() + ": " + e.what());
  }
  return RoadMap::from_json(j);
}

void save_map(const RoadMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write map file " + path.string());
  out << map.to_json().dump(2) << '\n';
}

RoadMap straight_road(int lane_count, double length, double lane_width, double start_y) {
  std::vector<Lane> lanes;
  const double left_edge = -lane_width * lane_count / 2.0;
  for (int i = 0; i < lane_count; ++i) {
    Lane lane;
    lane.id = "Lane" + std::to_string(i + 1);
    const double x0 = left_edge + lane_width * i;
    const double cx = x0 + lane_width / 2.0;
    lane.centerline = {{cx, start_y}, {cx, start_y + length}};
    lane.polygon = {{x0, start_y}, {x0 + lane_width, start_y}, {x0 + lane_width, start_y + length}, {x0, start_y + length}};
    // heading 0 points along +y, so smaller x is to the left
    if (i > 0) lane.left = "Lane" + std::to_string(i);
    if (i + 1 < lane_count) lane.right = "Lane" + std::to_string(i + 2);
    lanes.push_back(std::move(lane));
  }
  return RoadMap(std::move(lanes));
}

}  // namespace squery
