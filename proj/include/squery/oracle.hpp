#pragma once

#include <set>
#include <string>
#include <vector>

#include "squery/compiler.hpp"
#include "squery/road_map.hpp"
#include "squery/trace.hpp"
#include "squery/world.hpp"

namespace squery {

struct OracleBudget {
  std::size_t max_frames = 12;
  std::size_t max_states = 8;
  std::size_t max_sequences = 1u << 20;
};

using OutputSequence = std::vector<std::string>;

/// Every label sequence some run of `nfa` can emit on `frames`, found by
/// explicit path enumeration. Runs reaching the terminated state die. Throws
/// BudgetExceeded, MissingFeature, DomainError.
std::set<OutputSequence> enumerate_runs(const FlatNfa& nfa, const std::vector<Frame>& frames,
                                        const Correspondence& corr, const RoadMap& map,
                                        const std::map<std::string, ViewParams>& view,
                                        const WorldOptions& options = {}, const OracleBudget& budget = {});

/// Membership by brute force: every injective class-compatible
/// correspondence, every window, and the full run sets of every machine.
/// False when m is 0 or exceeds the trace. Throws BudgetExceeded.
bool brute_force_match(const ScenarioAST& ast, const LabelTrace& trace, std::size_t m, const RoadMap& map,
                       const WorldOptions& options = {}, const OracleBudget& budget = {});

}  // namespace squery
