#include "squery/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "squery/compiler.hpp"
#include "squery/dsl.hpp"
#include "squery/engine.hpp"
#include "squery/errors.hpp"
#include "squery/world.hpp"

namespace squery {

RoadMap default_synth_map() { return straight_road(3, 800.0, 3.5, -100.0); }

std::map<std::string, std::string> synth_ids(const ScenarioAST& ast, const SynthConfig& config) {
  std::map<std::string, std::string> ids;
  std::vector<std::size_t> order(ast.objects.size());
  std::iota(order.begin(), order.end(), 0);
  if (config.shuffle_ids) {
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(order.begin(), order.end(), rng);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::string& name = ast.objects[order[k]].name;
    ids[name] = config.shuffle_ids ? "obj" + std::to_string(k + 1) : name;
  }
  return ids;
}

namespace {

using Rng = std::mt19937_64;

double sample_dist(const DistRef& d, Rng& rng) {
  const Support s = d.support();
  if (s.discrete()) {
    std::uniform_int_distribution<std::size_t> pick(0, s.points.size() - 1);
    return s.points[pick(rng)];
  }
  switch (d.kind) {
    case DistKind::Normal:
      return d.params[1] == 0 ? d.params[0] : std::normal_distribution<double>(d.params[0], d.params[1])(rng);
    case DistKind::TruncatedNormal: {
      if (d.params[1] > 0) {
        std::normal_distribution<double> n(d.params[0], d.params[1]);
        for (int i = 0; i < 1000; ++i) {
          const double v = n(rng);
          if (v >= s.lo && v <= s.hi) return v;
        }
      }
      return std::clamp(d.params[0], s.lo, s.hi);
    }
    default:
      return s.lo == s.hi ? s.lo : std::uniform_real_distribution<double>(s.lo, s.hi)(rng);
  }
}

// Replaces every distribution with one sampled value, drawn once per trace.
ExprPtr concretize(const ExprPtr& e, std::map<int, double>& drawn, Rng& rng) {
  return rewrite(e, [&](const ExprPtr& n) -> ExprPtr {
    if (n->kind != ExprKind::Dist) return nullptr;
    auto it = drawn.find(n->dist.var_id);
    if (it == drawn.end()) it = drawn.emplace(n->dist.var_id, sample_dist(n->dist, rng)).first;
    return make_number(it->second, n->loc);
  });
}

StmtPtr concretize(const StmtPtr& s, std::map<int, double>& drawn, Rng& rng) {
  auto copy = std::make_shared<Stmt>(*s);
  copy->condition = concretize(s->condition, drawn, rng);
  for (auto& c : copy->children) c = concretize(c, drawn, rng);
  return copy;
}

// Primitive completions keep their distributions: when a primitive ends is
// decided by the kinematics below, within what the condition allows.
ScenarioAST concrete_program(const ScenarioAST& ast, Rng& rng) {
  ScenarioAST out = ast;
  std::map<int, double> drawn;
  for (auto& [_, def] : out.behaviors) def.body = concretize(def.body, drawn, rng);
  return out;
}

struct Mover {
  Vec2 pos;
  double heading = 0.0;
  const Lane* change_to = nullptr;
  double change_left = 0.0;  // seconds of lateral blend remaining
  std::string label;
  bool done = false;  // the active primitive has finished its motion
};

class Sampler {
 public:
  Sampler(const ScenarioAST& ast, const RoadMap& map, const SynthConfig& cfg, Rng& rng)
      : ast_(ast), map_(map), cfg_(cfg), rng_(rng), init_(initial_constraints(ast)) {
    if (map.lanes().empty()) throw ConfigError("synthetic traces need a map with lanes");
    const BoundingBox b = map.bounds();
    spawn_ = cfg.spawn.value_or(BoundingBox{b.min, {b.max.x, b.min.y + (b.max.y - b.min.y) / 2.0}});
    for (const auto& o : ast.objects) identity_.mapping[o.name] = o.name;
  }

  Scene sample() {
    while (true) {
      Scene scene;
      bool placed_all = true;
      for (const auto& obj : ast_.objects) {
        if (!place(obj, scene)) {
          placed_all = false;
          break;
        }
      }
      if (placed_all && fits(scene)) return scene;
      if (tries_ >= cfg_.max_tries) break;
    }
    throw UnsatisfiableScene("no initial scene found within " + std::to_string(cfg_.max_tries) + " samples");
  }

 private:
  const ScenarioAST& ast_;
  const RoadMap& map_;
  const SynthConfig& cfg_;
  Rng& rng_;
  InitialConstraints init_;
  Correspondence identity_;
  BoundingBox spawn_;
  std::size_t tries_ = 0;
  static constexpr std::size_t kTriesPerObject = 200;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  std::optional<Vec2> propose_position(const Scene& scene) {
    BoundingBox box = spawn_;
    if (!scene.objects.empty() && uniform(0, 1) < 0.5) {
      // Near an object already placed, where relative specifiers tend to hold.
      auto it = scene.objects.begin();
      std::advance(it, std::uniform_int_distribution<std::size_t>(0, scene.objects.size() - 1)(rng_));
      const Vec2 c{it->second.position.x, it->second.position.y};
      const BoundingBox all = map_.bounds();
      box = {{std::max(all.min.x, c.x - 60), std::max(all.min.y, c.y - 60)},
             {std::min(all.max.x, c.x + 60), std::min(all.max.y, c.y + 60)}};
    }
    for (int i = 0; i < 64; ++i) {
      const Vec2 p{uniform(box.min.x, box.max.x), uniform(box.min.y, box.max.y)};
      if (map_.lane_at(p)) return p;
    }
    return std::nullopt;
  }

  double propose_heading(Vec2 p) {
    const Lane* lane = map_.lane_at(p);
    const double u = uniform(0, 1);
    const double along = lane ? lane->direction_at(p) : 0.0;
    if (u < 0.5) return along;
    if (u < 0.75) return wrap_angle(along + kPi);
    return uniform(-kPi, kPi);
  }

  bool place(const ObjectDecl& obj, Scene& scene) {
    std::vector<Guard> own;
    for (const auto& spec : obj.specifiers) own.emplace_back(specifier_constraint(ast_, obj, spec));
    // A bad pose for an earlier object can leave little room for this one, so
    // give up after a while and let sample() start the scene over.
    for (std::size_t local = 0; local < kTriesPerObject && tries_ < cfg_.max_tries; ++local) {
      ++tries_;
      const auto p = propose_position(scene);
      if (!p) continue;
      ObjectState st;
      st.position = {p->x, p->y, 0.0};
      st.heading = propose_heading(*p);
      st.object_class = obj.object_class;
      if (const Lane* lane = map_.lane_at(*p)) st.lane = lane->id;
      scene.objects[obj.name] = st;
      if (satisfied(own, scene, obj.name)) return true;
      scene.objects.erase(obj.name);
    }
    return false;
  }

  bool satisfied(const std::vector<Guard>& guards, const Scene& scene, const std::string& self) {
    EvalContext ctx = make_context(scene, identity_, map_, init_.view, {});
    ctx.self = self;
    try {
      for (const auto& g : guards) {
        if (!guard_sat(g, ctx).can_true) return false;
      }
    } catch (const MissingFeature&) {
      return false;
    } catch (const DomainError&) {
      return false;
    }
    return true;
  }

  bool fits(const Scene& scene) {
    try {
      return initial_input_match(init_, scene, identity_, map_);
    } catch (const MissingFeature&) {
      return false;
    } catch (const DomainError&) {
      return false;
    }
  }
};

double speed_of(const SynthConfig& cfg, const std::string& label) {
  auto it = cfg.speeds.find(label);
  return it == cfg.speeds.end() ? 0.0 : it->second;
}

void advance(Mover& mv, const RoadMap& map, const SynthConfig& cfg) {
  const double step = speed_of(cfg, mv.label) * cfg.dt;
  const Lane* lane = map.lane_at(mv.pos);
  // Off the road there is no lane to change into; the car just keeps going.
  if (mv.label == "LaneChange" && (lane || mv.change_to)) {
    if (!mv.change_to) {
      const std::optional<std::string>& side = lane->left ? lane->left : lane->right;
      if (!side) throw NoAdjacentLane("lane change requested at (" + std::to_string(mv.pos.x) + ", " +
                                      std::to_string(mv.pos.y) + ") with no neighboring lane");
      mv.change_to = map.find_lane(*side);
      mv.change_left = cfg.lane_change_duration;
    }
    const double along = mv.change_to->direction_at(mv.pos);
    if (std::abs(wrap_angle(mv.heading - along)) <= kPi / 2) mv.heading = along;
    else mv.heading = wrap_angle(along + kPi);
    const Vec2 d = heading_vector(mv.heading);
    const Vec2 ahead{mv.pos.x + d.x * step, mv.pos.y + d.y * step};
    const auto proj = project_onto(mv.change_to->centerline, ahead);
    const Vec2 target = point_at(mv.change_to->centerline, proj.arc_length);
    const double frac = mv.change_left <= cfg.dt ? 1.0 : cfg.dt / mv.change_left;
    mv.pos = {ahead.x + (target.x - ahead.x) * frac, ahead.y + (target.y - ahead.y) * frac};
    mv.change_left -= cfg.dt;
    mv.done = mv.change_left <= 1e-9;
    return;
  }
  mv.change_to = nullptr;
  mv.done = false;
  if (step == 0.0) return;
  if (lane) {
    const double along = lane->direction_at(mv.pos);
    mv.heading = std::abs(wrap_angle(mv.heading - along)) <= kPi / 2 ? along : wrap_angle(along + kPi);
  }
  const Vec2 d = heading_vector(mv.heading);
  mv.pos = {mv.pos.x + d.x * step, mv.pos.y + d.y * step};
}

ActivePath choose(const std::set<ActivePath>& options, const ActivePath& current, bool done, Rng& rng) {
  std::vector<ActivePath> preferred;
  for (const auto& p : options) {
    if ((p == current) != done) preferred.push_back(p);
  }
  const auto& pool = preferred.empty() ? std::vector<ActivePath>(options.begin(), options.end()) : preferred;
  return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
}

}  // namespace

LabelTrace generate_trace(const ScenarioAST& ast, const RoadMap& map, const SynthConfig& config) {
  if (config.length < 1) throw ConfigError("trace length must be at least 1");
  if (!(config.dt > 0)) throw ConfigError("dt must be positive");
  Rng rng(config.seed);
  const Scene initial = Sampler(ast, map, config, rng).sample();
  const HfsmBundle bundle = translate(concrete_program(ast, rng));

  std::map<std::string, Mover> movers;
  std::map<std::string, ActivePath> config_of;
  for (const auto& m : bundle.machines) {
    const ObjectState& st = initial.objects.at(m.object);
    movers[m.object] = Mover{{st.position.x, st.position.y}, st.heading, nullptr, 0.0, "", false};
    const auto starts = initial_paths(m);
    config_of[m.object] = *starts.begin();
  }
  Correspondence identity;
  for (const auto& o : ast.objects) identity.mapping[o.name] = o.name;

  const auto ids = synth_ids(ast, config);
  LabelTrace trace;
  trace.hz = 1.0 / config.dt;
  for (const auto& o : ast.objects) trace.objects.push_back({ids.at(o.name), o.object_class});
  std::sort(trace.objects.begin(), trace.objects.end(),
            [](const TraceObject& a, const TraceObject& b) { return a.id < b.id; });

  Scene scene = initial;
  for (std::size_t t = 0; t < config.length; ++t) {
    scene.index = static_cast<int>(t);
    const EvalContext ctx = make_context(scene, identity, map, bundle.view, {});
    Frame frame;
    frame.scene.index = scene.index;
    for (const auto& m : bundle.machines) {
      Mover& mv = movers[m.object];
      const auto next = step_machine(m, {config_of[m.object]}, ctx);
      if (next.empty())
        throw ConfigError("behavior of '" + m.object + "' terminates at frame " + std::to_string(t));
      config_of[m.object] = choose(next, config_of[m.object], mv.done, rng);
      const std::string label = *base_label(m, config_of[m.object]);
      if (label != mv.label) mv.change_to = nullptr;
      mv.label = label == kAnyBehavior ? "Stationary" : label;
      const std::string& id = ids.at(m.object);
      frame.scene.objects[id] = scene.objects.at(m.object);
      frame.behaviors[id] = {mv.label};
    }
    trace.frames.push_back(std::move(frame));
    for (auto& [name, mv] : movers) {
      advance(mv, map, config);
      ObjectState& st = scene.objects.at(name);
      st.position = {mv.pos.x, mv.pos.y, 0.0};
      st.heading = mv.heading;
      const Lane* lane = map.lane_at(mv.pos);
      st.lane = lane ? std::optional(lane->id) : std::nullopt;
    }
  }
  trace.validate();
  return trace;
}

namespace {

std::string renamed(const std::string& name, const std::map<std::string, std::string>& table) {
  auto it = table.find(name);
  return it == table.end() ? name : it->second;
}

ExprPtr rename_objects(const ExprPtr& e, const std::map<std::string, std::string>& objects) {
  return rewrite(e, [&](const ExprPtr& n) -> ExprPtr {
    if (n->kind != ExprKind::ObjectRef || !objects.count(n->name)) return nullptr;
    auto copy = std::make_shared<Expr>(*n);
    copy->name = objects.at(n->name);
    return copy;
  });
}

StmtPtr rename_stmt(const StmtPtr& s, const std::map<std::string, std::string>& objects,
                    const std::map<std::string, std::string>& behaviors) {
  auto copy = std::make_shared<Stmt>(*s);
  copy->behavior = renamed(s->behavior, behaviors);
  copy->condition = rename_objects(s->condition, objects);
  for (auto& c : copy->children) c = rename_stmt(c, objects, behaviors);
  return copy;
}

}  // namespace

ScenarioAST scale_program(const ScenarioAST& ast, std::size_t n_objects) {
  const std::size_t base = ast.objects.size();
  if (base == 0 || n_objects < base || n_objects % base != 0)
    throw ConfigError("cannot scale a " + std::to_string(base) + "-object program to " + std::to_string(n_objects) +
                      " objects");
  ScenarioAST out = ast;
  for (std::size_t k = 2; k <= n_objects / base; ++k) {
    const std::string suffix = std::to_string(k);
    std::map<std::string, std::string> objects, behaviors;
    for (const auto& o : ast.objects) objects[o.name] = o.name + suffix;
    for (const auto& [name, _] : ast.behaviors) behaviors[name] = name + suffix;
    for (const auto& [name, def] : ast.behaviors) {
      BehaviorDef copy = def;
      copy.name = behaviors.at(name);
      copy.body = rename_stmt(def.body, objects, behaviors);
      out.behaviors[copy.name] = std::move(copy);
    }
    for (const auto& o : ast.objects) {
      ObjectDecl copy = o;
      copy.name = objects.at(o.name);
      for (auto& spec : copy.specifiers) {
        for (auto& a : spec.args) a = rename_objects(a, objects);
      }
      if (copy.behavior) copy.behavior = renamed(*copy.behavior, behaviors);
      out.objects.push_back(std::move(copy));
    }
    for (const auto& r : ast.requirements) out.requirements.push_back({rename_objects(r.condition, objects), r.loc});
  }
  // Reparsing renumbers the unobserved variables of the copies.
  ParseOptions opts;
  opts.primitives.insert(ast.primitive_behaviors.begin(), ast.primitive_behaviors.end());
  for (const auto& o : ast.objects) opts.object_classes.insert(o.object_class);
  return parse(print_program(out), opts);
}

}  // namespace squery
