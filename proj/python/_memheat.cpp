#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "memheat/cli.hpp"
#include "memheat/coeffs.hpp"
#include "memheat/config.hpp"
#include "memheat/criteria.hpp"
#include "memheat/errors.hpp"
#include "memheat/ode_oracle.hpp"
#include "memheat/pde.hpp"

namespace py = pybind11;
using namespace memheat;

namespace {

py::dict outcome_dict(const SimulationOutcome& o) {
  py::dict d;
  d["status"] = to_string(o.status);
  d["t_end"] = o.t_end;
  d["sup_norm_end"] = o.sup_norm_end;
  d["steps"] = o.steps;
  d["reason"] = o.reason;
  if (o.blowup) {
    d["t_cross"] = o.blowup->t_cross;
    d["t_fit"] = o.blowup->t_fit ? py::cast(*o.blowup->t_fit) : py::none();
  }
  py::list t, sup, mass;
  for (const auto& p : o.traces) {
    t.append(p.t);
    sup.append(p.sup_norm);
    mass.append(p.mass_w);
  }
  d["t"] = t;
  d["sup_norm"] = sup;
  d["mass_w"] = mass;
  return d;
}

}  // namespace

PYBIND11_MODULE(_memheat, m) {
  m.doc() = "heat equation with nonlinear memory boundary flux";

  py::register_exception<NotApplicable>(m, "NotApplicable");

  py::class_<CoefficientSpec>(m, "Coefficient")
      .def_static("constant", &CoefficientSpec::constant, py::arg("amplitude"))
      .def_static("power", &CoefficientSpec::power, py::arg("amplitude"), py::arg("gamma"))
      .def_static("exp_decay", &CoefficientSpec::exp_decay, py::arg("amplitude"), py::arg("lambda_"))
      .def_static("power_log", &CoefficientSpec::power_log, py::arg("amplitude"), py::arg("gamma"),
                  py::arg("log_depth"), py::arg("log_power"))
      .def_static("tabulated", &CoefficientSpec::tabulated, py::arg("table"))
      .def("__call__", [](const CoefficientSpec& s, double t) { return eval_coeff(s, t); })
      .def_property_readonly("family", [](const CoefficientSpec& s) { return to_string(s.family); })
      .def_readonly("amplitude", &CoefficientSpec::amplitude)
      .def_readonly("gamma", &CoefficientSpec::gamma);

  m.def(
      "integrate_improper",
      [](const CoefficientSpec& s, double weight_exponent, double t_lower) {
        const auto v = integrate_improper(s, Weight::power(weight_exponent), t_lower);
        return py::make_tuple(to_string(v.status), v.value, v.evidence);
      },
      py::arg("spec"), py::arg("weight_exponent") = 0.0, py::arg("t_lower") = 0.0);

  m.def(
      "classify",
      [](double p, double q, const CoefficientSpec& c, const CoefficientSpec& k) {
        const auto v = classify_regime(p, q, c, k);
        py::dict d;
        d["regime"] = to_string(v.regime);
        d["rule"] = v.rule;
        d["note"] = v.note;
        py::list ids;
        for (const auto& r : v.conditions) ids.append(r.id);
        d["conditions"] = ids;
        return d;
      },
      py::arg("p"), py::arg("q"), py::arg("c"), py::arg("k"));

  m.def("normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        py::arg("text"));

  m.def(
      "run_config",
      [](const std::string& text, int refine) {
        const auto cfg = parse_config(text);
        const Scenario s = refine > 0 ? refined(cfg.scenario, refine) : cfg.scenario;
        SimulationOutcome o;
        {
          py::gil_scoped_release release;
          o = run(s);
        }
        return outcome_dict(o);
      },
      py::arg("text"), py::arg("refine") = 0);

  m.def(
      "integrate_ode",
      [](const CoefficientSpec& b, double q, double y_a, double yp_a, double a, double r_max) {
        OdeProblem prob{a, y_a, yp_a, q, b};
        const auto o = integrate_ode(prob, r_max);
        py::dict d;
        d["status"] = to_string(o.status);
        d["r_star"] = o.r_star ? py::cast(*o.r_star) : py::none();
        d["r_end"] = o.r_end;
        d["energy_drift"] = o.energy_drift;
        return d;
      },
      py::arg("b"), py::arg("q"), py::arg("y_a") = 1.0, py::arg("yp_a") = 1.0, py::arg("a") = 0.0,
      py::arg("r_max") = 1e6);

  m.def(
      "estimate_blowup_time",
      [](const std::vector<double>& t, const std::vector<double>& sup, double p, double threshold) {
        if (t.size() != sup.size()) throw std::invalid_argument("t and sup must have equal length");
        std::vector<TracePoint> trace(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
          trace[i].t = t[i];
          trace[i].sup_norm = sup[i];
        }
        const auto e = estimate_blowup_time(trace, p, threshold);
        return py::make_tuple(e.t_cross, e.t_fit ? py::cast(*e.t_fit) : py::none(),
                              e.fit_quality ? py::cast(*e.fit_quality) : py::none());
      },
      py::arg("t"), py::arg("sup_norm"), py::arg("p"), py::arg("threshold"));
}
