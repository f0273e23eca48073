#include <catch2/catch_amalgamated.hpp>

#include "random_instance.hpp"
#include "squery/compiler.hpp"
#include "squery/dsl.hpp"
#include "squery/trace.hpp"
#include "squery/world.hpp"

using namespace squery;
using Catch::Matchers::WithinAbs;
using squery::testing::fixture_path;

namespace {

const TriState kFalseOnly{false, true};
const TriState kTrueOnly{true, false};
const TriState kBoth{true, true};

// A scene with two cars, corresponding to program objects ego and other.
struct TwoCars {
  Scene scene;
  Correspondence corr;
  RoadMap map;
  std::map<std::string, ViewParams> view;

  TwoCars(Vec3 ego, Vec3 other, double ego_heading = 0.0, double other_heading = 0.0) {
    scene.objects["car1"] = {ego, ego_heading, std::nullopt, "Car"};
    scene.objects["car2"] = {other, other_heading, std::nullopt, "Car"};
    corr.mapping = {{"ego", "car1"}, {"other", "car2"}};
  }

  EvalContext ctx(const std::string& self = "ego") const {
    EvalContext c = make_context(scene, corr, map, view, {});
    c.self = self;
    return c;
  }

  // Guard text is parsed as a requirement of a two-object program.
  TriState sat(const std::string& condition) const {
    const ScenarioAST ast = parse("ego = new Car\nother = new Car\nrequire " + condition + "\n");
    return guard_sat(ast.requirements.at(0).condition, ctx());
  }

  Value eval(const std::string& expression) const {
    const ScenarioAST ast = parse("ego = new Car\nother = new Car\nrequire (" + expression + ") == 0\n");
    return eval_expr(ast.requirements.at(0).condition->args.at(0), ctx());
  }
};

}  // namespace

TEST_CASE("guard tri-states along the worked example", "[guards]") {
  const LabelTrace trace = load_trace(fixture_path("lane_change_trace.json"));
  const RoadMap map = load_map(fixture_path("two_lane_map.json"));
  const HfsmBundle bundle = translate(parse_file(fixture_path("lane_change.scq")));
  const Hfsm& ego = bundle.machines[0];
  const Guard* g = nullptr;
  for (const auto& t : ego.transitions) {
    if (t.kind == TransitionKind::Condition) g = &ego.guards[static_cast<std::size_t>(t.guard)];
  }
  REQUIRE(g);

  Correspondence corr;
  corr.mapping = {{"ego", "car2"}, {"otherCar", "car1"}};
  const double distances[] = {20.0, 14.0, 10.0, 6.03, 1.41};
  const TriState expected[] = {kFalseOnly, kBoth, kBoth, kBoth, kBoth};
  for (std::size_t t = 0; t < 5; ++t) {
    const Scene& scene = trace.frames[t].scene;
    EvalContext ctx = make_context(scene, corr, map, bundle.view, {});
    ctx.self = "ego";
    const Value d = eval_expr(g->predicate->args[0], ctx);
    CHECK(d.scalar.degenerate());
    CHECK_THAT(d.scalar.lo, WithinAbs(distances[t], 0.01));
    CHECK(guard_sat(*g, ctx) == expected[t]);
  }
}

TEST_CASE("distance below every threshold is definitely true", "[guards]") {
  const TwoCars s({0, 0, 0}, {0, 0.5, 0});
  CHECK(s.sat("(distance to other) < Range(1, 15)") == kTrueOnly);
  CHECK(s.sat("(distance to other) > Range(1, 15)") == kFalseOnly);
}

TEST_CASE("distance uses every coordinate", "[guards]") {
  CHECK_THAT(TwoCars({0, 0, 0}, {0, 0, 20}).eval("distance to other").scalar.lo, WithinAbs(20.0, 1e-12));
  CHECK_THAT(TwoCars({0, 0, 0}, {0, 0.6, 6}).eval("distance to other").scalar.lo, WithinAbs(6.03, 0.01));
}

TEST_CASE("distribution values evaluate to their support", "[guards]") {
  const TwoCars s({0, 0, 0}, {0, 10, 0});
  const Value v = s.eval("Range(1, 15)");
  CHECK(v.scalar == Interval{1, 15});
  CHECK(s.eval("Range(1, 15) + 2").scalar == Interval{3, 17});
  CHECK(s.eval("Uniform(4, 2, 9)").scalar == Interval{2, 9});
}

TEST_CASE("each occurrence is quantified separately", "[guards]") {
  const TwoCars s({0, 0, 0}, {0, 10, 0});
  CHECK(s.sat("Range(0, 1) < Range(0, 1)") == kBoth);
  CHECK(s.sat("Range(0, 1) > 0.5") == kBoth);
  CHECK(s.sat("Range(0, 1) > 2") == kFalseOnly);
}

TEST_CASE("discrete supports only reach their points", "[guards]") {
  const TwoCars s({0, 0, 0}, {0, 10, 0});
  CHECK(s.sat("(distance to other) == Uniform(5, 10)") == kBoth);
  CHECK(s.sat("(distance to other) == Uniform(5, 11)") == kFalseOnly);
  CHECK(s.sat("(distance to other) < Uniform(3, 4)") == kFalseOnly);
}

TEST_CASE("unbounded supports", "[guards]") {
  const TwoCars s({0, 0, 0}, {0, 10, 0});
  CHECK(s.sat("(distance to other) < Normal(0, 1)") == kBoth);
  CHECK(s.sat("(distance to other) < Normal(50, 0)") == kTrueOnly);
}

TEST_CASE("equality uses an absolute tolerance", "[guards]") {
  const TwoCars s({0, 0, 0}, {0, 10 + 1e-12, 0});
  CHECK(s.sat("(distance to other) == 10") == kTrueOnly);
  CHECK(s.sat("(distance to other) != 10") == kFalseOnly);
}

TEST_CASE("boolean connectives over tri-states", "[guards]") {
  CHECK(tri_and(kBoth, kTrueOnly) == kBoth);
  CHECK(tri_and(kBoth, kFalseOnly) == kFalseOnly);
  CHECK(tri_or(kBoth, kTrueOnly) == kTrueOnly);
  CHECK(tri_not(kTrueOnly) == kFalseOnly);
  const TwoCars s({0, 0, 0}, {0, 10, 0});
  CHECK(s.sat("not ((distance to other) < 5)") == kTrueOnly);
  CHECK(s.sat("((distance to other) < 5) or (Range(0, 1) > 0.5)") == kBoth);
  CHECK(s.sat("((distance to other) < 50) and (Range(0, 1) > 2)") == kFalseOnly);
}

TEST_CASE("interval arithmetic", "[guards]") {
  CHECK(Interval{1, 2} + Interval{3, 4} == Interval{4, 6});
  CHECK(Interval{1, 2} - Interval{3, 4} == Interval{-3, -1});
  CHECK(Interval{-1, 2} * Interval{3, 4} == Interval{-4, 8});
  CHECK(-Interval{1, 2} == Interval{-2, -1});
  CHECK(abs(Interval{-3, 2}) == Interval{0, 3});
  CHECK(square(Interval{-3, 2}) == Interval{0, 9});
  CHECK(sqrt(Interval{4, 9}) == Interval{2, 3});
  CHECK(hull(Interval{0, 1}, Interval{5, 6}) == Interval{0, 6});
}

TEST_CASE("angles and headings", "[guards]") {
  const TwoCars s({0, 0, 0}, {0, 10, 0}, 0.0, kPi / 2);
  CHECK_THAT(s.eval("relative heading of other").scalar.lo, WithinAbs(kPi / 2, 1e-12));
  CHECK_THAT(s.eval("angle to other").scalar.lo, WithinAbs(0.0, 1e-12));
  CHECK_THAT(TwoCars({0, 0, 0}, {-10, 0, 0}).eval("angle to other").scalar.lo, WithinAbs(kPi / 2, 1e-12));
  CHECK_THAT(s.eval("30 deg").scalar.lo, WithinAbs(kPi / 6, 1e-12));
  CHECK(s.sat("ego can see other") == kTrueOnly);
  CHECK(s.sat("other can see ego") == kFalseOnly);
}

TEST_CASE("guard evaluation errors", "[guards]") {
  TwoCars s({0, 0, 0}, {0, 10, 0});
  SECTION("missing correspondent") {
    s.scene.objects.erase("car2");
    CHECK_THROWS_AS(s.sat("(distance to other) < 5"), MissingFeature);
  }
  SECTION("missing lane") { CHECK_THROWS_AS(s.sat("ego in other.lane"), MissingFeature); }
  SECTION("angle of a zero vector") {
    const TwoCars same({1, 1, 0}, {1, 1, 0});
    CHECK_THROWS_AS(same.sat("(angle to other) > 0"), DomainError);
  }
  SECTION("self outside a behavior") {
    const ScenarioAST ast = parse("behavior B():\n    do FollowLane until (distance from self to other) < 3\n"
                                  "ego = new Car with behavior B\nother = new Car\n");
    const auto bundle = translate(ast);
    const Guard& g = bundle.machines[0].guards.at(0);
    CHECK_THROWS_AS(guard_sat(g, s.ctx("")), UnsupportedGuard);
    CHECK(guard_sat(g, s.ctx("ego")) == kFalseOnly);
  }
}

TEST_CASE("repeated variables stay sound", "[guards]") {
  // Same variable twice cannot be expressed in source; build it directly.
  const TwoCars s({0, 0, 0}, {0, 10, 0});
  const ExprPtr x = make_dist(DistKind::Range, {0, 1}, 0);
  const ExprPtr diff = make_node(ExprKind::Sub, {x, x});
  // x - x is exactly 0, so only "false" is attainable, while a sound checker may add "true".
  const TriState t = guard_sat(make_compare(CmpOp::Gt, diff, make_number(0.5)), s.ctx());
  CHECK(t.can_false);
  const TriState u = guard_sat(make_compare(CmpOp::Lt, diff, make_number(0.5)), s.ctx());
  CHECK(u.can_true);
}
