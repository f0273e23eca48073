#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "random_instance.hpp"
#include "squery/compiler.hpp"
#include "squery/dsl.hpp"
#include "squery/engine.hpp"

using namespace squery;
using squery::testing::fixture_path;

namespace {

HfsmBundle lane_change() { return translate(parse_file(fixture_path("lane_change.scq"))); }

const HState* find_state(const Hfsm& m, const std::string& name) {
  for (const auto& s : m.states) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::set<std::string> labels_of(const FlatNfa& nfa) {
  std::set<std::string> out;
  for (const auto& l : nfa.labels) out.insert(l ? *l : "<terminated>");
  return out;
}

}  // namespace

TEST_CASE("lane-change behavior becomes a try/interrupt hierarchy", "[compiler]") {
  const HfsmBundle b = lane_change();
  REQUIRE(b.machines.size() == 2);
  const Hfsm& ego = b.machines[0];
  CHECK(ego.object == "ego");
  CHECK(ego.outputs == std::set<std::string>{"FollowLane", "LaneChange"});

  const HState* tryst = find_state(ego, "Try");
  const HState* handler = find_state(ego, "Interrupt");
  REQUIRE(tryst);
  REQUIRE(handler);
  REQUIRE(tryst->child);
  REQUIRE(handler->child);
  CHECK(ego.levels.front().initial == std::vector<StateId>{tryst->id});

  const auto base_in = [&](int level) {
    std::set<std::string> out;
    for (StateId s : ego.levels[static_cast<std::size_t>(level)].states) {
      if (ego.is_base(s)) out.insert(*ego.state(s).label);
    }
    return out;
  };
  CHECK(base_in(*tryst->child) == std::set<std::string>{"FollowLane"});
  CHECK(base_in(*handler->child) == std::set<std::string>{"LaneChange"});

  const Transition* interrupt = nullptr;
  for (const Transition* t : ego.exits(tryst->id)) {
    if (t->kind == TransitionKind::Condition) interrupt = t;
  }
  REQUIRE(interrupt);
  CHECK(interrupt->to == handler->id);
  CHECK(interrupt->suspend);
  CHECK(print_expr(ego.guards[static_cast<std::size_t>(interrupt->guard)].predicate) ==
        "((distance from ego to otherCar) < Range(1, 15))");
  CHECK(ego.inputs.count("otherCar.position"));
}

TEST_CASE("do without condition never exits", "[compiler]") {
  const HfsmBundle b = translate(parse("behavior B():\n    do Stationary\nego = new Car with behavior B\n"));
  const Hfsm& m = b.machines[0];
  CHECK(m.base_state_count() == 1);
  CHECK(m.transitions.empty());
  CHECK(flatten(m).size() == 1);
}

TEST_CASE("sequence of two primitives chains on termination", "[compiler]") {
  const char* src =
      "primitive Brake completes when Range(0, 1) > 0.5\n"
      "behavior B():\n    do Brake\n    do Stationary\nego = new Car with behavior B\n";
  const HfsmBundle b = translate(parse(src));
  const Hfsm& m = b.machines[0];
  CHECK(m.base_state_count() == 2);
  const FlatNfa nfa = flatten(m);
  CHECK(nfa.size() == 3);
  CHECK(labels_of(nfa) == std::set<std::string>{"Brake", "Stationary", "<terminated>"});
  // Brake -> Stationary needs the completion guard, and nothing leaves Stationary.
  for (const auto& e : nfa.edges) {
    if (nfa.labels[static_cast<std::size_t>(e.from)] == "Stationary") CHECK(e.to == e.from);
  }
}

TEST_CASE("flattened lane-change machine has three configurations", "[compiler]") {
  const HfsmBundle b = lane_change();
  const FlatNfa ego = flatten(b.machines[0]);
  CHECK(ego.size() == 3);
  CHECK(labels_of(ego) == std::set<std::string>{"FollowLane", "LaneChange", "<terminated>"});
  CHECK(ego.terminated >= 0);
  const FlatNfa other = flatten(b.machines[1]);
  CHECK(other.size() == 1);
  CHECK(other.terminated == -1);
}

TEST_CASE("objects without behavior are unconstrained", "[compiler]") {
  const HfsmBundle b = translate(parse("ego = new Car\n"));
  const Hfsm& m = b.machines[0];
  CHECK(m.unconstrained());
  CHECK(m.base_state_count() == 1);
}

TEST_CASE("termination predicates", "[compiler]") {
  const char* src =
      "behavior B():\n    do FollowLane until Range(0, 1) > 0.5\nego = new Car with behavior B\n";
  const HfsmBundle b = translate(parse(src));
  const Hfsm& m = b.machines[0];
  const StateId root = m.levels[0].initial[0];
  const Guard xt = termination_predicate(root, m);
  REQUIRE(xt.predicate);
  CHECK(xt.predicate->kind == ExprKind::ChildTerminated);

  // Inside the DoUntil state the child has not terminated; after its terminal
  // state is entered the predicate holds.
  const ActivePath running = *initial_paths(m).begin();
  CHECK(termination_holds(m, running, root, {}) == TriState::of(false));
  ActivePath ended = running;
  ended.back().state = m.levels[static_cast<std::size_t>(*m.state(root).child)].terminal;
  CHECK(termination_holds(m, ended, root, {}) == TriState::of(true));

  const HfsmBundle f = lane_change();
  const Hfsm& ego = f.machines[0];
  const ActivePath follow = *initial_paths(ego).begin();
  CHECK(termination_holds(ego, follow, follow.front().state, {}) == TriState::of(false));
  CHECK_THROWS_AS(termination_predicate(9999, ego), UnknownState);
  CHECK_THROWS_AS(termination_predicate("nobody", 0, f), UnknownState);
}

TEST_CASE("primitive completion makes the leaf able to terminate", "[compiler]") {
  const HfsmBundle b = lane_change();
  const Hfsm& ego = b.machines[0];
  const HState* lc = find_state(ego, "LaneChange");
  REQUIRE(lc);
  const Guard done = termination_predicate(lc->id, ego);
  CHECK(print_expr(done.predicate) == "(Range(0, 1) > 0.5)");
  const HState* fl = find_state(ego, "FollowLane");
  const Guard never = termination_predicate(fl->id, ego);
  CHECK(never.predicate->kind == ExprKind::Boolean);
  CHECK_FALSE(never.predicate->boolean);
}

TEST_CASE("bundle renderings", "[compiler]") {
  const HfsmBundle b = lane_change();
  const auto j = nlohmann::json::parse(bundle_to_json(b));
  REQUIRE(j["machines"].size() == 2);
  CHECK(j["machines"][0]["object"] == "ego");
  const std::string dot = bundle_to_dot(b);
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("cluster_m0") != std::string::npos);
  CHECK(dot.find("cluster_m1") != std::string::npos);
  CHECK(dot.find("Range(1, 15)") != std::string::npos);
}

TEST_CASE("translation rejects out-of-fragment trees", "[compiler]") {
  const ScenarioAST ast =
      parse_unchecked("behavior B():\n    do FollowLane\n    record ego.position\nego = new Car with behavior B\n");
  CHECK_THROWS_AS(translate(ast), TranslationError);
}

TEST_CASE("random programs translate deterministically", "[compiler]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    squery::testing::Rng rng(seed);
    const ScenarioAST ast = parse(squery::testing::random_program(rng));
    CHECK(bundle_to_json(translate(ast)) == bundle_to_json(translate(ast)));
  }
}
