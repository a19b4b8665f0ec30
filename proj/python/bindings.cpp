#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "setreg/moduli.hpp"
#include "setreg/parallel.hpp"
#include "setreg/report.hpp"
#include "setreg/runner.hpp"

namespace py = pybind11;
using namespace setreg;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
struct PyReport {
  std::string name;
  std::string command;
  std::string status;
  std::string payload;
  std::vector<std::pair<std::string, std::string>> csv;
  double wall_time = 0.0;
};

PyReport convert(const TaskReport& r) {
  return {r.name, r.command, r.status, r.payload.dump(), r.csv, r.wall_time};
}

RunOptions options(const std::string& task, std::optional<std::string> command,
                   bool fail_fast, std::optional<double> resolution) {
  RunOptions opt;
  opt.task = task;
  opt.command = std::move(command);
  opt.fail_fast = fail_fast;
  opt.resolution = resolution;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_setreg, m) {
  m.doc() = "Set-valued map verification on sampled grids";

  auto base = py::register_exception<Error>(m, "SetregError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<CapExceeded>(m, "CapExceeded", base.ptr());
  py::register_exception<InstanceError>(m, "InstanceError", base.ptr());

  m.attr("DEFAULT_CAP") = kDefaultCap;
  m.def("tool_version", &tool_version);
  m.def("content_digest", [](py::bytes b) { return content_digest(std::string(b)); });
  m.def("set_threads", &parallel::set_threads, py::arg("n"));
  m.def("threads", &parallel::threads);

  py::class_<PyReport>(m, "TaskReport")
      .def_readonly("name", &PyReport::name)
      .def_readonly("command", &PyReport::command)
      .def_readonly("status", &PyReport::status)
      .def_readonly("payload_json", &PyReport::payload)
      .def_readonly("csv", &PyReport::csv)
      .def_readonly("wall_time", &PyReport::wall_time)
      .def_property_readonly("ok", [](const PyReport& r) {
        return r.status == "PASS" || r.status == "SUCCESS";
      });

  py::class_<Instance>(m, "Instance")
      .def_readonly("origin", &Instance::origin)
      .def_readonly("digest", &Instance::digest)
      .def_property_readonly("spaces", [](const Instance& i) {
        std::map<std::string, std::size_t> out;
        for (const auto& [k, s] : i.spaces) out[k] = s->size();
        return out;
      })
      .def_property_readonly("tasks", [](const Instance& i) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& t : i.tasks) out.emplace_back(t.name, t.command);
        return out;
      })
      .def(
          "run",
          [](const Instance& i, const std::string& task, std::optional<std::string> command,
             bool fail_fast, std::optional<double> resolution) {
            const auto opt = options(task, std::move(command), fail_fast, resolution);
            std::vector<TaskReport> reports;
            {
              py::gil_scoped_release release;
              reports = run(i, opt);
            }
            std::vector<PyReport> out;
            for (const auto& r : reports) out.push_back(convert(r));
            return out;
          },
          py::arg("task") = "all", py::arg("command") = py::none(),
          py::arg("fail_fast") = false, py::arg("resolution") = py::none());

  m.def(
      "parse_instance",
      [](const std::string& text, std::size_t cap, const std::string& origin) {
        return parse_instance(text, cap, origin);
      },
      py::arg("text"), py::arg("cap") = kDefaultCap, py::arg("origin") = "<memory>");
  m.def("load_instance", &load_instance, py::arg("path"), py::arg("cap") = kDefaultCap);

  m.def(
      "linear_operator_moduli",
      [](const std::vector<std::vector<double>>& rows) {
        const auto lm = linear_operator_moduli(Matrix::from_rows(rows));
        json j = {{"rows", lm.rows},
                  {"cols", lm.cols},
                  {"singular_values", lm.singular_values},
                  {"surjective", lm.surjective},
                  {"lop", to_json(lm.lop)},
                  {"reg", to_json(lm.reg)}};
        return j.dump();
      },
      py::arg("rows"));
}
