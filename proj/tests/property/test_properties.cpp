#include <catch2/catch_amalgamated.hpp>

#include "properties.hpp"

using namespace squery::testing;

namespace {

constexpr std::size_t kCases = 1000;

void require_ok(const PropertyReport& r) {
  INFO(r.summary());
  REQUIRE(r.ok(kCases));
}

}  // namespace

TEST_CASE("print then parse is the identity", "[property]") { require_ok(check_round_trip(kCases, 101)); }
TEST_CASE("translation is deterministic and keeps every primitive", "[property]") {
  require_ok(check_translation(kCases, 102));
}
TEST_CASE("flattening preserves the step relation", "[property]") {
  require_ok(check_flatten_equivalence(kCases, 103));
}
TEST_CASE("guard checks agree with sampling", "[property]") { require_ok(check_guard_sampling(kCases, 104)); }
TEST_CASE("wider supports never lose values", "[property]") { require_ok(check_guard_widening(kCases, 105)); }
TEST_CASE("pruning keeps exactly the observed states", "[property]") { require_ok(check_pruning(kCases, 106)); }
TEST_CASE("shorter windows match whenever longer ones do", "[property]") {
  require_ok(check_monotone_in_m(kCases, 107));
}
TEST_CASE("generated traces match their program", "[property]") {
  require_ok(check_generated_matchable(kCases, 108));
}
TEST_CASE("generation is a function of the seed", "[property]") { require_ok(check_seed_determinism(kCases, 109)); }
TEST_CASE("trace files round trip", "[property]") { require_ok(check_trace_round_trip(kCases, 110)); }
TEST_CASE("point in polygon agrees with ray casting", "[property]") {
  require_ok(check_point_in_polygon(kCases, 111));
}
TEST_CASE("angles stay in range", "[property]") { require_ok(check_angle_range(kCases, 112)); }
