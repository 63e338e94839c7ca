#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "tcube/error.hpp"
#include "tcube/rulebook.hpp"
#include "tcube/scenarios.hpp"
#include "tcube/spatial.hpp"
#include "tcube/text.hpp"
#include "tcube/trace.hpp"

namespace py = pybind11;
using namespace tcube;

namespace {

Catalog catalog(const std::optional<std::string>& data_dir, const std::string& base_dir = ".") {
  Catalog c;
  if (data_dir) {
    c.datasets_dir = (std::filesystem::path(*data_dir) / "datasets").string();
    c.rulebooks_dir = (std::filesystem::path(*data_dir) / "rulebooks").string();
  }
  c.base_dir = base_dir;
  return c;
}

py::dict result_dict(const ReplayResult& r) {
  py::dict d;
  d["log"] = r.log;
  d["snapshot"] = r.snapshot.text();
  return d;
}

// (id, (x, y, z), (w, x, y, z)) tuples.
using CubeTuple = std::tuple<std::uint32_t, std::array<double, 3>, std::array<double, 4>>;

std::vector<CubeState> cube_states(const std::vector<CubeTuple>& cubes, double edge) {
  std::vector<CubeState> out;
  for (const auto& [id, p, q] : cubes) {
    CubeState s;
    s.id = CubeId{id};
    s.edge = edge;
    s.pose.position = {p[0], p[1], p[2]};
    s.pose.orientation = Quat{q[0], q[1], q[2], q[3]};
    out.push_back(s);
  }
  return out;
}

class PySession {
 public:
  PySession(const std::string& dataset, const std::string& rulebook, const std::optional<std::string>& data_dir)
      : session_(open(dataset, rulebook, data_dir)) {}

  std::string step(const std::string& sample) { return session_.step(parse_sample(sample)).text(); }
  std::string apply(const std::string& command) { return session_.apply_command(parse_command(command)).text(); }
  std::string finish(double t) { return session_.finish(t).text(); }
  std::string reset_all() { return session_.reset_all().text(); }
  std::string snapshot() const { return session_.snapshot().text(); }
  double now() const { return session_.now(); }

 private:
  static Session open(const std::string& dataset, const std::string& rulebook,
                      const std::optional<std::string>& data_dir) {
    TraceHeader h;
    h.dataset = dataset;
    h.rulebook = rulebook;
    return open_session(h, catalog(data_dir));
  }

  Session session_;
};

}  // namespace

PYBIND11_MODULE(_tcube, m) {
  m.doc() = "Tangible space-time cube engine: replay, sessions, contact analysis.";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result([&] { return py::exception<Error>(m, "Error"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args: (message, code, line, column)
      py::tuple args = py::make_tuple(e.what(), std::string(to_string(e.code())), e.line(), e.column());
      PyErr_SetObject(error.get_stored().ptr(), args.ptr());
    }
  });

  m.def("scenario_names", &scenario_names);
  m.def("generate_scenario", [](const std::string& name, std::uint64_t seed) {
    return trace_text(generate_scenario(name, seed));
  }, py::arg("name"), py::arg("seed") = 1, "Trace text for a built-in scenario.");

  m.def("replay_text", [](const std::string& text, std::optional<std::string> data_dir, const std::string& base_dir) {
    return result_dict(replay(parse_trace(text), catalog(data_dir, base_dir)));
  }, py::arg("text"), py::arg("data_dir") = py::none(), py::arg("base_dir") = ".");
  m.def("replay_file", [](const std::string& path, std::optional<std::string> data_dir) {
    const auto dir = std::filesystem::path(path).parent_path().string();
    return result_dict(replay(load_trace_file(path), catalog(data_dir, dir.empty() ? "." : dir)));
  }, py::arg("path"), py::arg("data_dir") = py::none());
  m.def("replay_chunked", [](const std::string& text, std::vector<std::size_t> chunks, std::optional<std::string> data_dir) {
    return result_dict(replay_chunked(text, chunks, catalog(data_dir)));
  }, py::arg("text"), py::arg("chunks"), py::arg("data_dir") = py::none());
  m.def("diff_snapshots", &diff_snapshots, py::arg("expected"), py::arg("actual"));

  m.def("contact_graph", [](const std::vector<CubeTuple>& cubes, double edge) {
    const auto states = cube_states(cubes, edge);
    py::list out;
    for (const auto& e : build_contact_graph(states, SpatialParams{}).edges) {
      py::dict d;
      d["a"] = e.a.value;
      d["b"] = e.b.value;
      d["kind"] = e.kind == ContactKind::stacked ? "stacked" : "neighbor";
      d["a_below"] = e.a_below;
      d["gap"] = e.gap;
      d["lateral_offset"] = e.lateral_offset;
      out.append(d);
    }
    return out;
  }, py::arg("cubes"), py::arg("edge") = 0.033, "Face contacts between (id, position, quaternion) cubes.");
  m.def("components", [](const std::vector<CubeTuple>& cubes, double edge) {
    const auto states = cube_states(cubes, edge);
    const SpatialParams params;
    py::list out;
    for (const auto& c : classify_components(build_contact_graph(states, params), states, params).components) {
      py::dict d;
      std::vector<std::uint32_t> members;
      std::vector<std::array<int, 3>> lattice;
      for (auto id : c.members) members.push_back(id.value);
      for (auto l : c.lattice) lattice.push_back({l.x, l.y, l.z});
      d["members"] = members;
      d["kind"] = std::string(to_string(c.kind));
      d["lattice"] = lattice;
      out.append(d);
    }
    return out;
  }, py::arg("cubes"), py::arg("edge") = 0.033);

  m.def("validate_rulebook", [](const std::string& text) {
    std::vector<std::string> out;
    for (const auto& c : validate(parse_rulebook(text))) out.push_back(c.message);
    return out;
  }, py::arg("text"), "Conflict messages; raises Error on a malformed rulebook.");

  py::class_<PySession>(m, "Session")
      .def(py::init<const std::string&, const std::string&, const std::optional<std::string>&>(),
           py::arg("dataset") = "health_expenditure", py::arg("rulebook") = "default", py::arg("data_dir") = py::none())
      .def("step", &PySession::step, py::arg("sample"), "Feeds one canonical sample line; returns the report text.")
      .def("apply", &PySession::apply, py::arg("command"))
      .def("finish", &PySession::finish, py::arg("t"))
      .def("reset_all", &PySession::reset_all)
      .def("snapshot", &PySession::snapshot)
      .def_property_readonly("now", &PySession::now);
}
