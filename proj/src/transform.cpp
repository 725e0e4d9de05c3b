#include "memheat/transform.hpp"

#include <algorithm>
#include <cmath>

#include "memheat/errors.hpp"

namespace memheat {

double TransformedScenario::rho(double t, double tau) const {
  return std::exp(base.q * C(tau) - C(t));
}

ProblemModel TransformedScenario::model() const {
  ProblemModel m;
  m.p = 1.0;
  m.q = base.q;
  auto prim = cumulative;
  const double q = base.q;
  m.flux_factor = [prim, k = base.k](double t) { return eval_coeff(k, t) * std::exp(-prim->value(t)); };
  m.memory_weight = [prim, q](double t) { return std::exp(q * prim->value(t)); };
  m.output_scale = [prim](double t) { return std::exp(prim->value(t)); };
  return m;
}

TransformedScenario to_transformed(const Scenario& s) {
  if (s.p != 1.0) throw NotApplicable("the transform needs p = 1");
  return {s, std::make_shared<const Primitive>(s.c)};
}

std::vector<double> from_transformed(const std::vector<double>& v, const Primitive& c, double t) {
  const double g = std::exp(c.value(t));
  std::vector<double> u(v);
  for (double& x : u) x *= g;
  return u;
}

std::vector<double> from_transformed(const std::vector<double>& v, const CoefficientSpec& c, double t) {
  return from_transformed(v, Primitive(c), t);
}

EquivalenceReport equivalence_check(const Scenario& s, double horizon) {
  const TransformedScenario ts = to_transformed(s);
  Scenario run_s = s;
  run_s.controls.t_max = horizon;
  run_s.controls.keep_fields = true;
  const auto direct = run(run_s);
  const auto mapped = run(run_s, ts.model());

  EquivalenceReport rep;
  rep.direct_status = direct.status;
  rep.transformed_status = mapped.status;
  rep.status_agree = direct.status == mapped.status;
  if (direct.blowup) rep.direct_t_cross = direct.blowup->t_cross;
  if (mapped.blowup) rep.transformed_t_cross = mapped.blowup->t_cross;

  // Both runs land exactly on the snapshot times; the final blow-up snapshots are off-grid.
  std::size_t j = 0;
  for (const auto& a : direct.snapshots) {
    while (j < mapped.snapshots.size() && mapped.snapshots[j].t < a.t) ++j;
    if (j == mapped.snapshots.size()) break;
    const auto& b = mapped.snapshots[j];
    if (b.t != a.t) continue;
    const auto u = from_transformed(b.u, *ts.cumulative, b.t);
    double diff = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) diff = std::max(diff, std::abs(a.u[i] - u[i]));
    const double sup = sup_norm(a.u);
    if (!std::isfinite(sup) || !std::isfinite(diff)) break;
    rep.discrepancy = std::max(rep.discrepancy, diff / (1.0 + sup));
    rep.t_compared = a.t;
    ++rep.snapshots;
  }
  return rep;
}

}  // namespace memheat
