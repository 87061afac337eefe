#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "steinlab/bounds.hpp"
#include "steinlab/error.hpp"
#include "steinlab/functionals.hpp"
#include "steinlab/scenario.hpp"

namespace py = pybind11;
using namespace steinlab;

namespace {

BoundParams params(const py::dict& d) {
  BoundParams P;
  for (auto [k, v] : d) {
    const std::string key = py::str(k);
    if (key == "K") P.K = v.cast<double>();
    else if (key == "alpha1") P.alpha1 = v.cast<double>();
    else if (key == "alpha2") P.alpha2 = v.cast<double>();
    else if (key == "beta") P.beta = v.cast<double>();
    else if (key == "n") P.n = v.cast<int>();
    else if (key == "ric_exact") P.ric_exact = v.cast<bool>();
    else if (key == "hess_exact") P.hess_exact = v.cast<bool>();
    else if (key == "eps") P.eps = v.cast<double>();
    else if (key == "p") P.p = v.cast<double>();
    else if (key == "delta") P.delta = v.cast<double>();
    else fail(ErrorCode::ConfigError, "unknown bound parameter '" + key + "'");
  }
  return P;
}

}  // namespace

PYBIND11_MODULE(_impl, m) {
  m.doc() = "steinlab core bindings";

  static py::exception<Error> error(m, "SteinlabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("preset_names", &preset_names);
  m.def("preset_yaml", &preset_yaml, py::arg("name"));
  // JSON text of the report; "preset:<name>", a path, or inline YAML.
  m.def(
      "run_json",
      [](const std::string& config, bool inline_yaml) {
        const Scenario s = inline_yaml ? parse_scenario(config) : resolve_scenario(config);
        py::gil_scoped_release release;
        return emit_json(run_scenario(s));
      },
      py::arg("config"), py::arg("inline_yaml") = false);

  m.def("theta", &theta, py::arg("r"));
  m.def("li", &li, py::arg("x"));
  m.def("lsi_bound", &lsi_bound, py::arg("I"), py::arg("K"));
  m.def("talagrand_bound", &talagrand_bound, py::arg("H"), py::arg("K"));
  m.def(
      "hsi_bound",
      [](double I, double S, const py::dict& P, const std::string& c) {
        return hsi_bound(I, S, params(P), hsi_case_from_string(c));
      },
      py::arg("I"), py::arg("S"), py::arg("params"), py::arg("case"));
  m.def(
      "ws_bound",
      [](double S, const py::dict& P, const std::string& v, double H) {
        return ws_bound(S, params(P), ws_variant_from_string(v), H);
      },
      py::arg("S"), py::arg("params"), py::arg("variant"), py::arg("H") = std::numeric_limits<double>::quiet_NaN());
  m.def(
      "hwsi_bound", [](double H, double S, const py::dict& P) { return hwsi_bound(H, S, params(P)); }, py::arg("H"),
      py::arg("S"), py::arg("params"));
  m.def(
      "psi",
      [](double t, const py::dict& P, const std::string& v) { return psi(t, params(P), psi_variant_from_string(v)); },
      py::arg("t"), py::arg("params"), py::arg("variant"));

  m.def(
      "gaussian_functionals",
      [](double sigma2, double shift) {
        const DensitySpec d = shift != 0.0 ? DensitySpec::gaussian_shift(shift) : DensitySpec::gaussian_scale(sigma2);
        const MeasurePair pair = make_pair(ModelSpace::gaussian(1, 1.0), d);
        const FunctionalReport r = compute_functionals(pair);
        return py::dict(py::arg("H") = r.H.value, py::arg("I") = r.I.value, py::arg("W2") = r.W2.value,
                        py::arg("S") = r.S());
      },
      py::arg("sigma2") = 1.0, py::arg("shift") = 0.0);
}
