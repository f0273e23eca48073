#pragma once

#include <map>
#include <optional>
#include <string>

#include "squery/geometry.hpp"

namespace squery {

/// Observed semantic features of one object at one timestep.
struct ObjectState {
  Vec3 position;
  double heading = 0.0;  // radians
  std::optional<std::string> lane;
  std::string object_class;

  bool operator==(const ObjectState&) const = default;
};

/// Observations of every visible object at a single timestep.
struct Scene {
  int index = 0;
  std::map<std::string, ObjectState> objects;

  const ObjectState* find(const std::string& id) const {
    auto it = objects.find(id);
    return it == objects.end() ? nullptr : &it->second;
  }
};

/// Injective map from program object names to trace object ids.
struct Correspondence {
  std::map<std::string, std::string> mapping;

  const std::string* target(const std::string& program_object) const {
    auto it = mapping.find(program_object);
    return it == mapping.end() ? nullptr : &it->second;
  }
  bool injective() const;
  std::string to_string() const;

  auto operator<=>(const Correspondence&) const = default;
};

}  // namespace squery
