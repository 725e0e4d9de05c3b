#include "memheat/ode_oracle.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <boost/numeric/odeint.hpp>

#include "memheat/errors.hpp"

namespace memheat {

namespace odeint = boost::numeric::odeint;

std::string to_string(OdeStatus s) { return s == OdeStatus::BlowUp ? "BlowUp" : "GlobalUpTo"; }

void OdeProblem::validate() const {
  if (!(a >= 0.0)) throw ConfigError("oracle.a must be >= 0");
  if (!(y_a >= 0.0) || !(yp_a >= 0.0) || !(y_a + yp_a > 0.0)) {
    throw ConfigError("oracle initial data needs y(a) >= 0, y'(a) >= 0, y(a) + y'(a) > 0");
  }
  if (!(q > 1.0)) throw ConfigError("oracle.q must be > 1");
  b.validate();
}

namespace {

using OdeState = std::array<double, 2>;

OdeOutcome integrate_once(const OdeProblem& prob, double r_max, const OdeControls& ctl) {
  const double q = prob.q;
  auto rhs = [&](const OdeState& s, OdeState& ds, double r) {
    ds[0] = s[1];
    ds[1] = eval_coeff(prob.b, r) * std::pow(std::max(s[0], 0.0), q);
  };
  auto stepper = odeint::make_controlled(ctl.atol, ctl.rtol, odeint::runge_kutta_dopri5<OdeState>());

  const bool constant_b = prob.b.family == Family::Constant;
  const double bc = constant_b ? prob.b.amplitude : 0.0;
  auto energy = [&](const OdeState& s) {
    return 0.5 * s[1] * s[1] - bc * std::pow(s[0], q + 1.0) / (q + 1.0);
  };
  auto energy_scale = [&](const OdeState& s) {
    return std::max({0.5 * s[1] * s[1], bc * std::pow(s[0], q + 1.0) / (q + 1.0), 1e-300});
  };

  OdeState s{prob.y_a, prob.yp_a};
  const double e0 = energy(s);
  double r = prob.a;
  double dr = 1e-3;
  OdeOutcome out;
  while (r < r_max) {
    const double bval = eval_coeff(prob.b, r);
    const double growth = bval * std::pow(std::max(s[0], 1e-300), q - 1.0);
    double cap = r_max - r;
    if (growth > 0.0) cap = std::min(cap, ctl.theta / std::sqrt(growth));
    dr = std::min(dr, cap);
    const OdeState prev = s;
    const double r_prev = r;
    if (stepper.try_step(rhs, s, r, dr) == odeint::fail) {
      if (dr < 1e-300) throw std::runtime_error("ode integrator step size underflow");
      continue;
    }
    ++out.steps;
    if (s[0] < 0.0 || !std::isfinite(s[1])) throw std::runtime_error("ode integrator fault: y < 0");
    if (constant_b && s[0] <= ctl.energy_limit) {
      out.energy_drift = std::max(out.energy_drift, std::abs(energy(s) - e0) / energy_scale(s));
    }
    if (!(s[0] < ctl.y_blow)) {
      // y^{-(q-1)/2} is close to linear in r just before blow-up.
      const double e = -(q - 1.0) / 2.0;
      const double z0 = std::pow(prev[0], e), z1 = std::pow(s[0], e), zt = std::pow(ctl.y_blow, e);
      double rs = r;
      if (std::isfinite(z1) && z1 != z0) rs = r_prev + (zt - z0) / (z1 - z0) * (r - r_prev);
      out.status = OdeStatus::BlowUp;
      out.r_star = rs;
      out.r_end = r;
      out.y_end = s[0];
      return out;
    }
  }
  out.status = OdeStatus::GlobalUpTo;
  out.r_end = r;
  out.y_end = s[0];
  return out;
}

}  // namespace

OdeOutcome integrate_ode(const OdeProblem& prob, double r_max, const OdeControls& controls,
                         bool with_refinement) {
  prob.validate();
  OdeOutcome out = integrate_once(prob, r_max, controls);
  if (with_refinement && out.status == OdeStatus::BlowUp) {
    OdeControls fine = controls;
    fine.rtol *= 0.5;
    fine.atol *= 0.5;
    const OdeOutcome other = integrate_once(prob, r_max, fine);
    if (other.status == OdeStatus::BlowUp) {
      out.refinement_stability = std::abs(*out.r_star - *other.r_star) / std::abs(*out.r_star);
    } else {
      out.refinement_stability = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

OdeCriterion check_ode_blowup_criterion(const CoefficientSpec& b, double q, double a, double t_large) {
  OdeCriterion rec;
  rec.divergence = integrate_improper(b, Weight::power(q), a);
  rec.alt_bounded = decays_at_least(b, q + 1.0, t_large);
  rec.alt_monotone = weighted_nonincreasing(b, 0.0, t_large);
  rec.applies = rec.divergence.diverges() && (rec.alt_bounded || rec.alt_monotone);
  return rec;
}

}  // namespace memheat
