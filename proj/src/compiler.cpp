#include "squery/compiler.hpp"

#include <functional>
#include <sstream>

#include <json.hpp>

#include "squery/dsl.hpp"
#include "squery/world.hpp"

namespace squery {

bool operator==(const PathEntry& a, const PathEntry& b) {
  return a.state == b.state && a.suspended == b.suspended;
}

bool operator<(const PathEntry& a, const PathEntry& b) {
  if (a.state != b.state) return a.state < b.state;
  return a.suspended < b.suspended;
}

const HState& Hfsm::state(StateId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= states.size())
    throw UnknownState("machine of '" + object + "' has no state " + std::to_string(id));
  return states[static_cast<std::size_t>(id)];
}

std::vector<const Transition*> Hfsm::exits(StateId id) const {
  std::vector<const Transition*> out;
  for (const auto& t : transitions) {
    if (t.from == id) out.push_back(&t);
  }
  return out;
}

std::size_t Hfsm::base_state_count() const {
  std::size_t n = 0;
  for (const auto& s : states) n += is_base(s.id) ? 1 : 0;
  return n;
}

const Hfsm* HfsmBundle::find(const std::string& object) const {
  for (const auto& m : machines) {
    if (m.object == object) return &m;
  }
  return nullptr;
}

std::string path_to_string(const Hfsm& m, const ActivePath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += "/";
    out += m.state(path[i].state).name;
    if (!path[i].suspended.empty()) out += "[" + path_to_string(m, path[i].suspended) + "]";
  }
  return out;
}

namespace {

class Translator {
 public:
  Translator(const ScenarioAST& ast, Hfsm& m) : ast_(ast), m_(m) {}

  void object_root(const ObjectDecl& obj) {
    if (!obj.behavior) {
      const int level = new_level(std::nullopt);
      const StateId any = add_state(level, kAnyBehavior, kAnyBehavior);
      m_.levels[level].initial = {any};
      m_.levels[level].terminal = add_terminal(level);
      return;
    }
    behavior(*obj.behavior, std::nullopt);
  }

 private:
  const ScenarioAST& ast_;
  Hfsm& m_;

  int new_level(std::optional<StateId> parent) {
    Level l;
    l.id = static_cast<int>(m_.levels.size());
    l.parent = parent;
    m_.levels.push_back(l);
    return l.id;
  }

  StateId add_state(int level, const std::string& name, std::optional<std::string> label = std::nullopt) {
    HState s;
    s.id = static_cast<StateId>(m_.states.size());
    s.name = name;
    s.level = level;
    s.label = std::move(label);
    if (s.label) m_.outputs.insert(*s.label);
    m_.states.push_back(s);
    m_.levels[level].states.push_back(s.id);
    return s.id;
  }

  StateId add_terminal(int level) {
    const StateId t = add_state(level, "Term");
    m_.states[t].terminal = true;
    return t;
  }

  void set_child(StateId s, int child) { m_.states[s].child = child; }

  int add_guard(const ExprPtr& e) {
    m_.guards.emplace_back(e);
    return static_cast<int>(m_.guards.size()) - 1;
  }

  void edge(StateId from, StateId to, TransitionKind kind, int guard = -1, bool suspend = false, bool resume = false) {
    m_.transitions.push_back({from, to, kind, guard, suspend, resume});
  }

  int behavior(const std::string& name, std::optional<StateId> parent) {
    if (ast_.is_primitive(name) || !ast_.behaviors.count(name)) {
      if (!ast_.is_primitive(name)) throw TranslationError("unknown behavior '" + name + "'");
      return primitive(name, parent);
    }
    return statement(*ast_.behaviors.at(name).body, parent);
  }

  int primitive(const std::string& name, std::optional<StateId> parent) {
    const int level = new_level(parent);
    const StateId base = add_state(level, name, name);
    const StateId term = add_terminal(level);
    m_.levels[level].initial = {base};
    m_.levels[level].terminal = term;
    auto decl = ast_.declared_primitives.find(name);
    if (decl != ast_.declared_primitives.end() && decl->second.completion)
      edge(base, term, TransitionKind::Completion, add_guard(decl->second.completion));
    return level;
  }

  int statement(const Stmt& s, std::optional<StateId> parent) {
    switch (s.kind) {
      case StmtKind::Do: {
        if (!s.condition) return behavior(s.behavior, parent);
        const int level = new_level(parent);
        const StateId d = add_state(level, "DoUntil(" + s.behavior + ")");
        set_child(d, behavior(s.behavior, d));
        const StateId term = add_terminal(level);
        m_.levels[level].initial = {d};
        m_.levels[level].terminal = term;
        edge(d, term, TransitionKind::Condition, add_guard(s.condition));
        edge(d, term, TransitionKind::ChildTerminated);
        return level;
      }
      case StmtKind::Seq: {
        const int level = new_level(parent);
        std::vector<StateId> parts;
        for (std::size_t i = 0; i < s.children.size(); ++i) {
          const StateId p = add_state(level, "Seq" + std::to_string(i + 1));
          set_child(p, statement(*s.children[i], p));
          parts.push_back(p);
        }
        const StateId term = add_terminal(level);
        m_.levels[level].initial = {parts.front()};
        m_.levels[level].terminal = term;
        for (std::size_t i = 0; i < parts.size(); ++i)
          edge(parts[i], i + 1 < parts.size() ? parts[i + 1] : term, TransitionKind::ChildTerminated);
        return level;
      }
      case StmtKind::TryInterrupt: {
        const int level = new_level(parent);
        const StateId t = add_state(level, "Try");
        set_child(t, statement(*s.children[0], t));
        const StateId in = add_state(level, "Interrupt");
        set_child(in, statement(*s.children[1], in));
        const StateId term = add_terminal(level);
        m_.levels[level].initial = {t};
        m_.levels[level].terminal = term;
        edge(t, in, TransitionKind::Condition, add_guard(s.condition), true, false);
        edge(in, t, TransitionKind::ChildTerminated, -1, false, true);
        edge(t, term, TransitionKind::ChildTerminated);
        return level;
      }
      case StmtKind::Unsupported:
        throw TranslationError(s.construct + " cannot be translated");
    }
    throw TranslationError("malformed statement");
  }
};

void collect_inputs(const Hfsm& m, std::set<std::string>& out) {
  for (const auto& g : m.guards) {
    std::function<void(const ExprPtr&, bool)> walk = [&](const ExprPtr& e, bool under_property) {
      if (!e) return;
      switch (e->kind) {
        case ExprKind::Property: {
          const auto& base = e->args[0];
          const std::string who = base->kind == ExprKind::SelfRef ? m.object : base->name;
          out.insert(who + "." + e->name);
          walk(base, true);
          return;
        }
        case ExprKind::ObjectRef:
        case ExprKind::SelfRef:
          if (!under_property) {
            const std::string who = e->kind == ExprKind::SelfRef ? m.object : e->name;
            out.insert(who + ".position");
            out.insert(who + ".heading");
          }
          return;
        case ExprKind::RegionAll:
        case ExprKind::RegionNamed: out.insert("map"); return;
        default:
          for (const auto& a : e->args) walk(a, false);
      }
    };
    walk(g.predicate, false);
  }
}

}  // namespace

HfsmBundle translate(const ScenarioAST& ast) {
  if (const auto v = fragment_check(ast); !v.empty())
    throw TranslationError(v.front().to_string() + " is outside the supported fragment");
  HfsmBundle bundle;
  bundle.view = view_params(ast);
  for (const auto& obj : ast.objects) {
    Hfsm m;
    m.object = obj.name;
    m.object_class = obj.object_class;
    m.behavior = obj.behavior;
    m.view = bundle.view.at(obj.name);
    Translator(ast, m).object_root(obj);
    collect_inputs(m, m.inputs);
    bundle.machines.push_back(std::move(m));
  }
  return bundle;
}

Guard termination_predicate(StateId state, const Hfsm& m) {
  const HState& s = m.state(state);
  if (s.terminal) return Guard(make_bool(true));
  if (s.child) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::ChildTerminated;
    e->number = *s.child;
    return Guard(e);
  }
  for (const Transition* t : m.exits(state)) {
    if (t->kind == TransitionKind::Completion) return m.guards[static_cast<std::size_t>(t->guard)];
  }
  return Guard(make_bool(false));
}

Guard termination_predicate(const std::string& object, StateId state, const HfsmBundle& bundle) {
  const Hfsm* m = bundle.find(object);
  if (!m) throw UnknownState("no machine for object '" + object + "'");
  return termination_predicate(state, *m);
}

namespace {

const char* kind_name(TransitionKind k) {
  switch (k) {
    case TransitionKind::Condition: return "condition";
    case TransitionKind::Completion: return "completion";
    case TransitionKind::ChildTerminated: return "child_terminated";
  }
  return "?";
}

std::string edge_label(const Hfsm& m, const Transition& t) {
  if (t.kind == TransitionKind::ChildTerminated) return m.state(t.from).name + "_T";
  return print_expr(m.guards[static_cast<std::size_t>(t.guard)].predicate);
}

}  // namespace

std::string bundle_to_json(const HfsmBundle& bundle, int indent) {
  using nlohmann::json;
  json out;
  out["machines"] = json::array();
  for (const auto& m : bundle.machines) {
    json jm;
    jm["object"] = m.object;
    jm["class"] = m.object_class;
    jm["behavior"] = m.behavior ? json(*m.behavior) : json(nullptr);
    jm["view"] = {{"half_angle", m.view.half_angle}, {"range", m.view.range}};
    jm["inputs"] = m.inputs;
    jm["outputs"] = m.outputs;
    jm["states"] = json::array();
    for (const auto& s : m.states) {
      json js{{"id", s.id}, {"name", s.name}, {"level", s.level}, {"terminal", s.terminal}};
      js["child"] = s.child ? json(*s.child) : json(nullptr);
      js["label"] = s.label ? json(*s.label) : json(nullptr);
      jm["states"].push_back(js);
    }
    jm["levels"] = json::array();
    for (const auto& l : m.levels) {
      jm["levels"].push_back({{"id", l.id},
                              {"parent", l.parent ? json(*l.parent) : json(nullptr)},
                              {"states", l.states},
                              {"initial", l.initial},
                              {"terminal", l.terminal}});
    }
    jm["guards"] = json::array();
    for (const auto& g : m.guards) jm["guards"].push_back(print_expr(g.predicate));
    jm["transitions"] = json::array();
    for (const auto& t : m.transitions) {
      json jt{{"from", t.from}, {"to", t.to}, {"kind", kind_name(t.kind)}, {"label", edge_label(m, t)}};
      jt["guard"] = t.guard >= 0 ? json(t.guard) : json(nullptr);
      if (t.suspend) jt["suspend"] = true;
      if (t.resume) jt["resume"] = true;
      jm["transitions"].push_back(jt);
    }
    out["machines"].push_back(jm);
  }
  return out.dump(indent);
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void dot_level(std::ostringstream& out, const Hfsm& m, int level, const std::string& prefix, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  for (StateId id : m.levels[level].states) {
    const HState& s = m.state(id);
    const std::string node = prefix + "_s" + std::to_string(id);
    if (s.child) {
      out << pad << "subgraph cluster_" << node << " {\n";
      out << pad << "  label=\"" << dot_escape(s.name) << "\";\n";
      out << pad << "  " << node << " [shape=box, style=rounded, label=\"" << dot_escape(s.name) << "\"];\n";
      dot_level(out, m, *s.child, prefix, depth + 1);
      out << pad << "}\n";
    } else if (s.terminal) {
      out << pad << node << " [shape=point, width=0.15, label=\"\"];\n";
    } else {
      out << pad << node << " [shape=box, label=\"" << dot_escape(s.name) << "\"];\n";
    }
  }
}

}  // namespace

std::string bundle_to_dot(const HfsmBundle& bundle) {
  std::ostringstream out;
  out << "digraph hfsm {\n  compound=true;\n  node [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < bundle.machines.size(); ++i) {
    const Hfsm& m = bundle.machines[i];
    const std::string prefix = "m" + std::to_string(i);
    out << "  subgraph cluster_" << prefix << " {\n";
    out << "    label=\"" << dot_escape(m.object) << (m.behavior ? " : " + dot_escape(*m.behavior) : "") << "\";\n";
    dot_level(out, m, 0, prefix, 2);
    for (const auto& t : m.transitions) {
      out << "    " << prefix << "_s" << t.from << " -> " << prefix << "_s" << t.to << " [label=\""
          << dot_escape(edge_label(m, t)) << "\"";
      if (t.resume) out << ", style=dashed";
      out << "];\n";
    }
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace squery
