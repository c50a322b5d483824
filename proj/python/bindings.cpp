#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "protodown/diffexpr.hpp"
#include "protodown/enrich.hpp"
#include "protodown/service.hpp"

namespace py = pybind11;
using namespace protodown;

namespace {

// JSON crosses the boundary as text; the Python wrapper decodes it.
class PySession {
 public:
  PySession(const std::string& main, const std::string& config_json, std::optional<std::string> report) {
    service::Inputs in;
    in.main = main;
    in.report = std::move(report);
    if (!config_json.empty()) in.config = serialize::ingest_config_from(serialize::parse(config_json));
    service::Options opts;
    opts.persist_dir.reset();
    session_ = std::make_unique<service::Session>("py", std::move(in), opts);
  }

  std::string update(const std::string& section, const std::string& body) {
    return session_->update(service::parse_section(section), serialize::parse(body)).to_json().dump();
  }
  std::string payload(const std::string& artifact, const service::Query& q) { return session_->payload(artifact, q); }
  py::bytes export_artifact(const std::string& artifact, const std::string& format, const service::Query& q) {
    return py::bytes(session_->export_artifact(artifact, format, q).body);
  }
  std::string summary() const { return session_->summary().dump(); }
  std::string manifest() const { return session_->manifest().dump(); }
  std::map<std::string, std::string> stage_hashes() const {
    std::map<std::string, std::string> out;
    for (const auto& [stage, h] : session_->stage_hashes()) out[std::string(service::to_string(stage))] = h;
    return out;
  }

 private:
  std::unique_ptr<service::Session> session_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "protodown engine";

  // kept alive for the interpreter's lifetime
  static PyObject* error_type = py::exception<Error>(m, "ProtodownError", PyExc_RuntimeError).inc_ref().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      auto type = py::reinterpret_borrow<py::object>(error_type);
      py::object err = type(std::string(to_string(e.code())) + ": " + e.what());
      err.attr("code") = std::string(to_string(e.code()));
      err.attr("detail") = e.detail();
      PyErr_SetObject(error_type, err.ptr());
    }
  });

  m.def("engine_version", [] { return std::string(service::engine_version()); });
  m.def("sha256_hex", [](const std::string& s) { return service::sha256_hex(s); });

  m.def(
      "bh_adjust",
      [](const std::vector<std::optional<double>>& p) { return diffexpr::bh_adjust(std::span(p.data(), p.size())); },
      py::arg("pvalues"), "Benjamini-Hochberg adjustment; None entries stay None.");
  m.def(
      "fit_ebayes",
      [](const std::vector<double>& var, const std::vector<double>& df) {
        if (var.size() != df.size()) throw ValidationError("variances and dfs differ in length");
        const auto fit = diffexpr::fit_ebayes(var, df);
        return py::make_tuple(fit.d0, fit.s0_sq);
      },
      py::arg("variances"), py::arg("dfs"), "Prior (d0, s0_sq) by moment matching on log variances.");
  m.def("hypergeometric_upper_tail", &enrich::hypergeometric_upper_tail, py::arg("k"), py::arg("N"), py::arg("K"),
        py::arg("n"), "P(X >= k) for overlap X of an n-draw from N with K successes.");

  py::class_<PySession>(m, "_Session")
      .def(py::init<const std::string&, const std::string&, std::optional<std::string>>(), py::arg("main"),
           py::arg("config_json"), py::arg("report") = py::none())
      .def("update", &PySession::update, py::call_guard<py::gil_scoped_release>())
      .def("payload", &PySession::payload, py::arg("artifact"), py::arg("query") = service::Query{},
           py::call_guard<py::gil_scoped_release>())
      .def("export", &PySession::export_artifact, py::arg("artifact"), py::arg("format"),
           py::arg("query") = service::Query{})
      .def("summary", &PySession::summary)
      .def("manifest", &PySession::manifest)
      .def("stage_hashes", &PySession::stage_hashes);
}
