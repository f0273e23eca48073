#include "squery/trace.hpp"

#include <cmath>
#include <fstream>

#include "squery/errors.hpp"

namespace squery {

using nlohmann::json;

const TraceObject* LabelTrace::find_object(const std::string& id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

void LabelTrace::validate() const {
  if (!(hz > 0) || !std::isfinite(hz)) throw ValidationError("frame rate must be positive");
  std::set<std::string> ids;
  for (const auto& o : objects) {
    if (o.id.empty()) throw ValidationError("object id must not be empty");
    if (!ids.insert(o.id).second) throw ValidationError("object '" + o.id + "' declared twice");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    if (i > 0 && f.index() != frames[i - 1].index() + 1) {
      throw ValidationError("frame indices must be consecutive: " + std::to_string(frames[i - 1].index()) +
                            " is followed by " + std::to_string(f.index()));
    }
    for (const auto& [id, st] : f.scene.objects) {
      const TraceObject* decl = find_object(id);
      if (!decl) throw ValidationError("frame " + std::to_string(f.index()) + " mentions undeclared object '" + id + "'");
      if (st.object_class != decl->object_class)
        throw ValidationError("object '" + id + "' changes class at frame " + std::to_string(f.index()));
      const Vec3 p = st.position;
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(st.heading))
        throw ValidationError("non-finite observation for '" + id + "' at frame " + std::to_string(f.index()));
      auto b = f.behaviors.find(id);
      if (b == f.behaviors.end() || b->second.empty())
        throw ValidationError("empty behavior set for '" + id + "' at frame " + std::to_string(f.index()));
    }
    for (const auto& [id, _] : f.behaviors) {
      if (!f.scene.find(id))
        throw ValidationError("behaviors given for absent object '" + id + "' at frame " + std::to_string(f.index()));
    }
  }
}

std::map<std::string, std::vector<PresenceInterval>> presence_intervals(const LabelTrace& trace) {
  std::map<std::string, std::vector<PresenceInterval>> out;
  for (const auto& o : trace.objects) out[o.id];
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    for (const auto& [id, _] : trace.frames[i].scene.objects) {
      auto& list = out[id];
      if (!list.empty() && list.back().last + 1 == i) {
        list.back().last = i;
      } else {
        list.push_back({i, i});
      }
    }
  }
  return out;
}

std::size_t longest_presence(const LabelTrace& trace, const std::string& id) {
  std::size_t best = 0, run = 0;
  for (const auto& f : trace.frames) {
    run = f.scene.find(id) ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

std::map<std::string, std::size_t> object_durations(const LabelTrace& trace) {
  std::map<std::string, std::size_t> out;
  for (const auto& o : trace.objects) out[o.id] = 0;
  for (const auto& f : trace.frames) {
    for (const auto& [id, _] : f.scene.objects) ++out[id];
  }
  return out;
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw FormatError(where + ": " + what);
}

const json& field(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) bad(where, std::string("missing field '") + name + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

}  // namespace

LabelTrace trace_from_json(const json& j) {
  if (!j.is_object()) bad("trace", "expected a JSON object");
  LabelTrace t;
  if (auto it = j.find("hz"); it != j.end()) t.hz = number(*it, "hz");
  const json& objs = field(j, "objects", "trace");
  if (!objs.is_array()) bad("objects", "expected an array");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string where = "objects[" + std::to_string(i) + "]";
    const json& o = objs[i];
    if (!o.is_object()) bad(where, "expected an object");
    const json& id = field(o, "id", where);
    const json& cls = field(o, "class", where);
    if (!id.is_string() || !cls.is_string()) bad(where, "id and class must be strings");
    t.objects.push_back({id.get<std::string>(), cls.get<std::string>()});
  }
  const json& frames = field(j, "frames", "trace");
  if (!frames.is_array()) bad("frames", "expected an array");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string where = "frames[" + std::to_string(i) + "]";
    const json& fj = frames[i];
    if (!fj.is_object()) bad(where, "expected an object");
    const json& tj = field(fj, "t", where);
    if (!tj.is_number_integer()) bad(where, "'t' must be an integer");
    Frame f;
    f.scene.index = tj.get<int>();
    const json& present = field(fj, "objs", where);
    if (!present.is_object()) bad(where, "'objs' must be an object");
    for (const auto& [id, oj] : present.items()) {
      const std::string ow = where + ".objs." + id;
      if (!oj.is_object()) bad(ow, "expected an object");
      ObjectState st;
      const json& pos = field(oj, "pos", ow);
      if (!pos.is_array() || pos.size() < 2 || pos.size() > 3) bad(ow, "'pos' must hold 2 or 3 numbers");
      st.position.x = number(pos[0], ow + ".pos");
      st.position.y = number(pos[1], ow + ".pos");
      if (pos.size() == 3) st.position.z = number(pos[2], ow + ".pos");
      st.heading = number(field(oj, "heading", ow), ow + ".heading");
      if (auto lane = oj.find("lane"); lane != oj.end() && !lane->is_null()) {
        if (!lane->is_string()) bad(ow, "'lane' must be a string or null");
        st.lane = lane->get<std::string>();
      }
      const json& beh = field(oj, "behaviors", ow);
      if (!beh.is_array()) bad(ow, "'behaviors' must be an array");
      std::set<std::string> set;
      for (const auto& b : beh) {
        if (!b.is_string()) bad(ow, "behavior names must be strings");
        set.insert(b.get<std::string>());
      }
      if (const TraceObject* decl = t.find_object(id)) st.object_class = decl->object_class;
      f.scene.objects.emplace(id, std::move(st));
      f.behaviors.emplace(id, std::move(set));
    }
    t.frames.push_back(std::move(f));
  }
  t.validate();
  return t;
}

json trace_to_json(const LabelTrace& t) {
  json j;
  j["hz"] = t.hz;
  j["objects"] = json::array();
  for (const auto& o : t.objects) j["objects"].push_back({{"id", o.id}, {"class", o.object_class}});
  j["frames"] = json::array();
  for (const auto& f : t.frames) {
    json objs = json::object();
    for (const auto& [id, st] : f.scene.objects) {
      json oj;
      oj["pos"] = {st.position.x, st.position.y, st.position.z};
      oj["heading"] = st.heading;
      oj["lane"] = st.lane ? json(*st.lane) : json(nullptr);
      auto b = f.behaviors.find(id);
      oj["behaviors"] = b == f.behaviors.end() ? json::array() : json(b->second);
      objs[id] = std::move(oj);
    }
    j["frames"].push_back({{"t", f.index()}, {"objs", std::move(objs)}});
  }
  return j;
}

LabelTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open trace file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return trace_from_json(j);
}

void save_trace(const LabelTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace file '" + path.string() + "'");
  out << trace_to_json(trace).dump(1) << '\n';
}

bool traces_equal(const LabelTrace& a, const LabelTrace& b, double tol) {
  auto close = [&](double x, double y) { return std::abs(x - y) <= tol; };
  if (!close(a.hz, b.hz) || a.objects != b.objects || a.frames.size() != b.frames.size()) return false;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    const Frame& fa = a.frames[i];
    const Frame& fb = b.frames[i];
    if (fa.index() != fb.index() || fa.behaviors != fb.behaviors) return false;
    if (fa.scene.objects.size() != fb.scene.objects.size()) return false;
    for (const auto& [id, sa] : fa.scene.objects) {
      const ObjectState* sb = fb.scene.find(id);
      if (!sb || sa.lane != sb->lane || sa.object_class != sb->object_class) return false;
      if (!close(sa.position.x, sb->position.x) || !close(sa.position.y, sb->position.y) ||
          !close(sa.position.z, sb->position.z) || !close(sa.heading, sb->heading))
        return false;
    }
  }
  return true;
}

}  // namespace squery
