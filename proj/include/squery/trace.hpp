#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "squery/scene.hpp"

namespace squery {

struct TraceObject {
  std::string id;
  std::string object_class;

  bool operator==(const TraceObject&) const = default;
};

/// One timestep: observed features plus the feasible primitive behaviors of
/// every present object.
struct Frame {
  Scene scene;
  std::map<std::string, std::set<std::string>> behaviors;

  int index() const { return scene.index; }
};

/// Inclusive range of frame positions (not frame indices) in which an object is present.
struct PresenceInterval {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t length() const { return last - first + 1; }
  bool operator==(const PresenceInterval&) const = default;
};

struct LabelTrace {
  double hz = 2.0;
  std::vector<TraceObject> objects;  // declaration order
  std::vector<Frame> frames;

  std::size_t size() const { return frames.size(); }
  const TraceObject* find_object(const std::string& id) const;

  /// Throws ValidationError on inconsistent content.
  void validate() const;
};

struct Window {
  std::size_t start = 0;
  std::size_t length = 1;
};

/// Contiguous presence intervals of every declared object (gaps split them).
std::map<std::string, std::vector<PresenceInterval>> presence_intervals(const LabelTrace& trace);
std::size_t longest_presence(const LabelTrace& trace, const std::string& id);

/// Number of frames in which each object is present.
std::map<std::string, std::size_t> object_durations(const LabelTrace& trace);

/// Throws FormatError on schema violations and ValidationError on bad content.
LabelTrace trace_from_json(const nlohmann::json& j);
nlohmann::json trace_to_json(const LabelTrace& trace);
LabelTrace load_trace(const std::filesystem::path& path);
void save_trace(const LabelTrace& trace, const std::filesystem::path& path);

/// Structural equality with float tolerance.
bool traces_equal(const LabelTrace& a, const LabelTrace& b, double tolerance = 1e-9);

}  // namespace squery
