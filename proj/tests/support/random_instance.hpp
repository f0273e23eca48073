#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "squery/ast.hpp"
#include "squery/road_map.hpp"
#include "squery/trace.hpp"

namespace squery::testing {

using Rng = std::mt19937_64;

struct InstanceLimits {
  int max_objects = 3;
  int max_base_states = 4;  // per object
  std::size_t max_flat_states = 8;
  std::size_t min_frames = 2;
  std::size_t max_frames = 12;
  int max_trace_objects = 4;
};

/// Small instance for oracle comparisons: a random in-fragment program, a
/// random trace over `map` and a window length.
struct RandomInstance {
  std::uint64_t seed = 0;
  std::string source;
  ScenarioAST ast;
  LabelTrace trace;
  std::size_t m = 1;
};

/// Two 3.5 m lanes along +y, 80 m long, x in [-3.5, 3.5].
const RoadMap& instance_map();

/// Source text of a random program within `limits`; every object machine
/// flattens to at most `max_flat_states` configurations.
std::string random_program(Rng& rng, const InstanceLimits& limits = {});

/// Random trace whose objects use classes from `classes`.
LabelTrace random_trace(Rng& rng, const RoadMap& map, const std::vector<std::string>& classes,
                        const InstanceLimits& limits = {});

RandomInstance random_instance(std::uint64_t seed, const InstanceLimits& limits = {});

/// Path of a file in the test fixtures directory.
std::string fixture_path(const std::string& name);
std::string read_file(const std::string& path);

}  // namespace squery::testing
