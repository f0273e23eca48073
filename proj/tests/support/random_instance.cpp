#include "random_instance.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "squery/compiler.hpp"
#include "squery/dsl.hpp"

#ifndef SQUERY_FIXTURE_DIR
#error "SQUERY_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace squery::testing {

namespace {

const std::vector<std::string> kCarPrimitives = {"FollowLane", "LaneChange", "Stationary", "Brake"};
const std::vector<std::string> kPedPrimitives = {"Walk", "Stationary"};
const std::vector<std::string> kLabels = {"FollowLane", "LaneChange", "Stationary", "Brake", "Walk"};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(v.size()) - 1))];
}

std::string num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

std::string range(double lo, double hi) { return "Range(" + num(lo) + ", " + num(hi) + ")"; }

class ProgramGen {
 public:
  ProgramGen(Rng& rng, const InstanceLimits& lim) : rng_(rng), lim_(lim) {}

  std::string run() {
    const int n = uniform_int(rng_, 1, lim_.max_objects);
    for (int i = 0; i < n; ++i) {
      names_.push_back(i == 0 ? "ego" : std::string(1, static_cast<char>('a' + i - 1)));
      classes_.push_back(i > 0 && coin(rng_, 0.2) ? "Pedestrian" : "Car");
    }
    std::ostringstream out;
    for (const auto& p : kCarPrimitives) {
      if (!coin(rng_, 0.35)) continue;
      self_ = "self";
      out << "primitive " << p << " completes when " << completion() << "\n";
    }
    std::vector<std::string> decls;
    for (int i = 0; i < n; ++i) {
      self_ = names_[static_cast<std::size_t>(i)];
      std::string decl = names_[static_cast<std::size_t>(i)] + " = new " + classes_[static_cast<std::size_t>(i)];
      const auto specs = specifiers(i);
      for (std::size_t k = 0; k < specs.size(); ++k) decl += (k == 0 ? " " : ", ") + specs[k];
      if (i == 0 || coin(rng_, 0.75)) {
        const std::string b = "B" + std::to_string(i);
        primitives_ = classes_[static_cast<std::size_t>(i)] == "Car" ? &kCarPrimitives : &kPedPrimitives;
        int budget = uniform_int(rng_, 1, lim_.max_base_states);
        // Helpers are emitted while the body is built, so the body goes in after them.
        const std::string body = block(budget, 1, 0);
        behaviors_ << "behavior " << b << "():\n" << body;
        decl += std::string(specs.empty() ? " " : ", ") + "with behavior " + b;
      }
      decls.push_back(decl);
    }
    out << behaviors_.str();
    for (const auto& d : decls) out << d << "\n";
    if (n > 1 && coin(rng_, 0.2)) out << "require (distance to " << names_[1] << ") < " << range(0, 40) << "\n";
    return out.str();
  }

 private:
  Rng& rng_;
  const InstanceLimits& lim_;
  std::vector<std::string> names_, classes_;
  std::string self_;
  const std::vector<std::string>* primitives_ = &kCarPrimitives;
  std::ostringstream behaviors_;
  int helpers_ = 0;

  std::vector<std::string> others() const {
    std::vector<std::string> o;
    for (const auto& n : names_) {
      if (n != self_) o.push_back(n);
    }
    return o;
  }

  std::string completion() {
    if (coin(rng_, 0.5)) return "Range(0, 1) > 0.5";
    const double lo = uniform(rng_, 0, 10);
    return "(distance from self to " + pick(rng_, names_) + ") > " + range(lo, lo + uniform(rng_, 0, 20));
  }

  std::string atom() {
    const auto o = others();
    const int kind = uniform_int(rng_, 0, 6);
    if (o.empty() || kind >= 5) {
      if (kind == 6) return "Range(0, 1) > 0.5";
      const double lo = uniform(rng_, 0, 20);
      return "(distance from self to (" + num(uniform(rng_, -4, 4)) + ", " + num(uniform(rng_, -30, 30)) +
             ")) < " + range(lo, lo + uniform(rng_, 0, 20));
    }
    const std::string x = pick(rng_, o);
    switch (kind) {
      case 0: {
        const double lo = uniform(rng_, 0, 12);
        return "(distance from self to " + x + ") < " + range(lo, lo + uniform(rng_, 0, 15));
      }
      case 1:
        return "(distance from self to " + x + ") > " + num(uniform(rng_, 2, 25));
      case 2:
        return "self can see " + x;
      case 3: {
        const double lo = uniform(rng_, -2, 1);
        return "(relative heading of " + x + " from self) > " + range(lo, lo + uniform(rng_, 0, 1.5));
      }
      default:
        return "(angle from self to " + x + ") < " + num(uniform(rng_, -1.5, 1.5));
    }
  }

  std::string condition(int depth) {
    const double r = uniform(rng_, 0, 1);
    if (depth == 0 || r < 0.6) return atom();
    if (r < 0.7) return "not (" + condition(depth - 1) + ")";
    const char* op = r < 0.85 ? " and " : " or ";
    return "(" + condition(depth - 1) + ")" + op + "(" + condition(depth - 1) + ")";
  }

  static std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 4, ' '); }

  // A statement block using at most `budget` base states; `budget` is reduced by what it used.
  std::string block(int& budget, int indent, int depth) {
    std::string out;
    const int count = uniform_int(rng_, 1, std::min(2, budget));
    for (int k = 0; k < count && budget > 0; ++k) out += statement(budget, indent, depth);
    return out;
  }

  std::string statement(int& budget, int indent, int depth) {
    const double r = uniform(rng_, 0, 1);
    if (budget >= 2 && depth < 2 && r < 0.35) {
      int try_budget = uniform_int(rng_, 1, budget - 1);
      int handler_budget = budget - try_budget;
      const int before = try_budget + handler_budget;
      std::string out = pad(indent) + "try:\n" + block(try_budget, indent + 1, depth + 1);
      out += pad(indent) + "interrupt when " + condition(1) + ":\n" + block(handler_budget, indent + 1, depth + 1);
      budget -= before - try_budget - handler_budget;
      return out;
    }
    if (depth < 2 && helpers_ < 2 && r < 0.45) {
      const std::string name = "H" + std::to_string(helpers_++) + "_" + self_;
      int inner = uniform_int(rng_, 1, budget);
      const int before = inner;
      const std::string body = block(inner, 1, depth + 1);
      behaviors_ << "behavior " << name << "():\n" << body;
      budget -= before - inner;
      std::string out = pad(indent) + "do " + name + "()";
      if (coin(rng_, 0.3)) out += " until " + condition(1);
      return out + "\n";
    }
    --budget;
    std::string out = pad(indent) + "do " + pick(rng_, *primitives_);
    if (coin(rng_, 0.4)) out += " until " + condition(1);
    return out + "\n";
  }

  std::vector<std::string> specifiers(int i) {
    std::vector<std::string> pool;
    if (i == 0) {
      pool = {"on lane", "facing " + range(-30, 30) + " deg"};
    } else {
      pool = {"on ego.lane",
              "on lane",
              "visible from ego",
              "ahead of ego",
              "behind ego",
              "facing " + range(-30, 30) + " deg relative to ego.heading"};
    }
    std::shuffle(pool.begin(), pool.end(), rng_);
    pool.resize(static_cast<std::size_t>(uniform_int(rng_, 0, i == 0 ? 1 : 2)));
    return pool;
  }
};

bool within_limits(const std::string& source, const InstanceLimits& lim) {
  const HfsmBundle bundle = translate(parse(source));
  return std::all_of(bundle.machines.begin(), bundle.machines.end(), [&](const Hfsm& m) {
    return m.base_state_count() <= static_cast<std::size_t>(lim.max_base_states) &&
           flatten(m).size() <= lim.max_flat_states;
  });
}

std::set<std::string> random_labels(Rng& rng, const std::string& cls) {
  if (cls == "Pedestrian" && coin(rng, 0.7)) return {coin(rng, 0.6) ? "Walk" : "Stationary"};
  std::set<std::string> out;
  const int size = coin(rng, 0.5) ? 1 : uniform_int(rng, 2, 3);
  if (coin(rng, 0.5)) out.insert("FollowLane");
  while (static_cast<int>(out.size()) < size) out.insert(pick(rng, kLabels));
  return out;
}

}  // namespace

const RoadMap& instance_map() {
  static const RoadMap map = straight_road(2, 80.0, 3.5, -40.0);
  return map;
}

std::string random_program(Rng& rng, const InstanceLimits& limits) {
  for (;;) {
    std::string source = ProgramGen(rng, limits).run();
    if (within_limits(source, limits)) return source;
  }
}

LabelTrace random_trace(Rng& rng, const RoadMap& map, const std::vector<std::string>& classes,
                        const InstanceLimits& limits) {
  LabelTrace t;
  const auto len = static_cast<std::size_t>(
      uniform_int(rng, static_cast<int>(limits.min_frames), static_cast<int>(limits.max_frames)));
  const int count = uniform_int(rng, 1, limits.max_trace_objects);
  std::map<std::string, int> per_class;
  for (int k = 0; k < count; ++k) {
    const std::string cls = coin(rng, 0.8) ? pick(rng, classes) : (coin(rng, 0.5) ? "Car" : "Pedestrian");
    t.objects.push_back({(cls == "Car" ? "car" : "ped") + std::to_string(++per_class[cls]), cls});
  }
  t.frames.resize(len);
  for (std::size_t f = 0; f < len; ++f) t.frames[f].scene.index = static_cast<int>(f);

  for (const auto& obj : t.objects) {
    std::size_t first = 0, last = len - 1;
    if (coin(rng, 0.2)) {
      first = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(len) - 1));
      last = static_cast<std::size_t>(uniform_int(rng, static_cast<int>(first), static_cast<int>(len) - 1));
    }
    std::optional<std::size_t> gap;
    if (last > first + 1 && coin(rng, 0.1))
      gap = static_cast<std::size_t>(uniform_int(rng, static_cast<int>(first) + 1, static_cast<int>(last) - 1));

    double x = coin(rng, 0.1) ? (coin(rng, 0.5) ? -6.0 : 6.0) : (coin(rng, 0.5) ? -1.75 : 1.75);
    x += uniform(rng, -0.4, 0.4);
    double y = uniform(rng, -30, 20);
    const double r = uniform(rng, 0, 1);
    double heading = r < 0.7 ? uniform(rng, -0.1, 0.1) : (r < 0.85 ? kPi : uniform(rng, -kPi, kPi));
    const double speed = obj.object_class == "Car" ? uniform(rng, 0, 4) : uniform(rng, 0, 1.5);
    std::set<std::string> labels = random_labels(rng, obj.object_class);
    for (std::size_t f = first; f <= last; ++f) {
      if (gap && f == *gap) continue;
      ObjectState st;
      st.position = {x, y, 0.0};
      st.heading = wrap_angle(heading);
      st.object_class = obj.object_class;
      if (const Lane* lane = map.lane_at(st.position.xy()); lane && !coin(rng, 0.03)) st.lane = lane->id;
      t.frames[f].scene.objects[obj.id] = st;
      t.frames[f].behaviors[obj.id] = labels;
      const Vec2 d = heading_vector(heading);
      x += d.x * speed + uniform(rng, -0.3, 0.3);
      y += d.y * speed;
      heading += uniform(rng, -0.05, 0.05);
      if (coin(rng, 0.3)) labels = random_labels(rng, obj.object_class);
    }
  }
  t.validate();
  return t;
}

RandomInstance random_instance(std::uint64_t seed, const InstanceLimits& limits) {
  Rng rng(seed);
  RandomInstance inst;
  inst.seed = seed;
  inst.source = random_program(rng, limits);
  inst.ast = parse(inst.source);
  std::vector<std::string> classes;
  for (const auto& o : inst.ast.objects) classes.push_back(o.object_class);
  inst.trace = random_trace(rng, instance_map(), classes, limits);
  inst.m = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<int>(inst.trace.size())));
  return inst;
}

std::string fixture_path(const std::string& name) { return std::string(SQUERY_FIXTURE_DIR) + "/" + name; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace squery::testing
