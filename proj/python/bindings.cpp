#include <pybind11/chrono.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "squery/compiler.hpp"
#include "squery/dsl.hpp"
#include "squery/errors.hpp"
#include "squery/oracle.hpp"
#include "squery/query.hpp"
#include "squery/synth.hpp"

namespace py = pybind11;
using namespace squery;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Correspondence correspondence_from(const std::map<std::string, std::string>& m) {
  Correspondence c;
  c.mapping = m;
  return c;
}

}  // namespace

PYBIND11_MODULE(_squery, m) {
  m.doc() = "Scenario queries over labeled driving traces";

  auto base = py::register_exception<Error>(m, "SqueryError");
  py::register_exception<SyntaxError>(m, "SyntaxError", base.ptr());
  py::register_exception<UnsupportedFeature>(m, "UnsupportedFeature", base.ptr());
  py::register_exception<SemanticError>(m, "SemanticError", base.ptr());
  py::register_exception<TranslationError>(m, "TranslationError", base.ptr());
  py::register_exception<MissingFeature>(m, "MissingFeature", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", base.ptr());
  py::register_exception<UnsatisfiableScene>(m, "UnsatisfiableScene", base.ptr());

  py::class_<ScenarioAST>(m, "Program")
      .def_static("parse", [](const std::string& src) { return parse(src); }, py::arg("source"))
      .def_static("load", [](const std::filesystem::path& p) { return parse_file(p); }, py::arg("path"))
      .def_property_readonly("objects",
                             [](const ScenarioAST& a) {
                               std::vector<std::string> names;
                               for (const auto& o : a.objects) names.push_back(o.name);
                               return names;
                             })
      .def_property_readonly("primitive_behaviors", [](const ScenarioAST& a) { return a.primitive_behaviors; })
      .def("source", [](const ScenarioAST& a) { return print_program(a); })
      .def("hfsm_json", [](const ScenarioAST& a) { return to_python(nlohmann::json::parse(bundle_to_json(translate(a)))); })
      .def("hfsm_dot", [](const ScenarioAST& a) { return bundle_to_dot(translate(a)); })
      .def("scale", &scale_program, py::arg("n_objects"))
      .def("__eq__", [](const ScenarioAST& a, const ScenarioAST& b) { return same_program(a, b); });

  m.def(
      "fragment_check",
      [](const std::string& src) {
        std::vector<std::string> out;
        for (const auto& v : fragment_check(parse_unchecked(src))) out.push_back(v.to_string());
        return out;
      },
      py::arg("source"), "Constructs outside the supported fragment, one line each.");

  py::class_<LabelTrace>(m, "Trace")
      .def_static("load", &load_trace, py::arg("path"))
      .def_static("from_json",
                  [](const std::string& text) {
                    nlohmann::json j;
                    try {
                      j = nlohmann::json::parse(text);
                    } catch (const nlohmann::json::parse_error& e) {
                      throw FormatError(e.what());
                    }
                    return trace_from_json(j);
                  })
      .def("to_json", [](const LabelTrace& t) { return trace_to_json(t).dump(); })
      .def("save", &save_trace, py::arg("path"))
      .def("durations", &object_durations)
      .def_property_readonly("object_ids",
                             [](const LabelTrace& t) {
                               std::vector<std::string> ids;
                               for (const auto& o : t.objects) ids.push_back(o.id);
                               return ids;
                             })
      .def("__len__", &LabelTrace::size);

  py::class_<RoadMap>(m, "RoadMap")
      .def_static("load", &load_map, py::arg("path"))
      .def_static("default", &default_synth_map)
      .def_property_readonly("lane_ids", [](const RoadMap& r) {
        std::vector<std::string> ids;
        for (const auto& l : r.lanes()) ids.push_back(l.id);
        return ids;
      });

  m.def(
      "query",
      [](const ScenarioAST& ast, const LabelTrace& trace, std::size_t min_duration, const RoadMap& map, bool find_all,
         std::optional<double> timeout) {
        QueryOptions q;
        q.find_all = find_all;
        if (timeout) q.timeout = std::chrono::duration<double>(*timeout);
        QueryResult r;
        {
          py::gil_scoped_release release;
          r = query(ast, trace, min_duration, map, q);
        }
        return to_python(r.to_json());
      },
      py::arg("program"), py::arg("trace"), py::arg("min_duration"), py::arg("map"), py::arg("find_all") = false,
      py::arg("timeout") = py::none(), "Result dictionary with matched, witness and stats.");

  m.def(
      "match_window",
      [](const ScenarioAST& ast, const LabelTrace& trace, const std::map<std::string, std::string>& corr,
         std::size_t start, std::size_t length, const RoadMap& map) {
        return match_window(compile_program(ast), trace, correspondence_from(corr), start, length, map);
      },
      py::arg("program"), py::arg("trace"), py::arg("correspondence"), py::arg("start"), py::arg("length"),
      py::arg("map"));

  m.def(
      "correspondences",
      [](const ScenarioAST& ast, const LabelTrace& trace, std::size_t min_duration) {
        std::vector<std::map<std::string, std::string>> out;
        for (const auto& c : correspondence_candidates(ast, trace, min_duration)) out.push_back(c.mapping);
        return out;
      },
      py::arg("program"), py::arg("trace"), py::arg("min_duration"));

  m.def(
      "oracle_match",
      [](const ScenarioAST& ast, const LabelTrace& trace, std::size_t min_duration, const RoadMap& map) {
        return brute_force_match(ast, trace, min_duration, map);
      },
      py::arg("program"), py::arg("trace"), py::arg("min_duration"), py::arg("map"));

  m.def(
      "generate",
      [](const ScenarioAST& ast, const RoadMap& map, std::uint64_t seed, std::size_t length, bool shuffle_ids) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.length = length;
        cfg.shuffle_ids = shuffle_ids;
        return generate_trace(ast, map, cfg);
      },
      py::arg("program"), py::arg("map"), py::arg("seed") = 0, py::arg("length") = 100,
      py::arg("shuffle_ids") = false);
}
