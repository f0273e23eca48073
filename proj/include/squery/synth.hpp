#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "squery/ast.hpp"
#include "squery/geometry.hpp"
#include "squery/road_map.hpp"
#include "squery/trace.hpp"

namespace squery {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t length = 100;  // frames
  double dt = 0.5;           // seconds per frame
  /// Speed in m/s while a primitive is active; unlisted primitives hold still.
  std::map<std::string, double> speeds = {{"FollowLane", 5.0}, {"LaneChange", 5.0}, {"TurnLeft", 4.0},
                                          {"TurnRight", 4.0},  {"Brake", 2.0},      {"Walk", 1.4}};
  double lane_change_duration = 2.0;  // seconds for the lateral blend
  std::size_t max_tries = 10000;      // rejection sampling budget for the initial scene
  /// Name trace objects obj1..objN in a seeded random order instead of
  /// reusing the program names.
  bool shuffle_ids = false;
  /// Initial positions are drawn from this box; defaults to the lower half of
  /// the map so that objects have road ahead of them.
  std::optional<BoundingBox> spawn;
};

/// Samples an initial scene that satisfies the program under the identity
/// correspondence, then executes one run of every machine with a crude
/// kinematic stepper. Behavior sets are singletons. Throws ConfigError,
/// UnsatisfiableScene and NoAdjacentLane.
LabelTrace generate_trace(const ScenarioAST& ast, const RoadMap& map, const SynthConfig& config);

/// Trace object id of every program object for a given config (identity
/// unless ids are shuffled).
std::map<std::string, std::string> synth_ids(const ScenarioAST& ast, const SynthConfig& config);

/// Replicates every object (and the behaviors it uses) until the program has
/// `n_objects` objects; copy k renames `x` to `x<k>`. Throws ConfigError
/// unless `n_objects` is a positive multiple of the current object count.
ScenarioAST scale_program(const ScenarioAST& ast, std::size_t n_objects);

/// Three parallel 800 m lanes along +y used when no map is given.
RoadMap default_synth_map();

}  // namespace squery
