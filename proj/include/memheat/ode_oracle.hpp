#pragma once

#include <optional>
#include <string>

#include "memheat/coeffs.hpp"

namespace memheat {

/// y'' = b(r) y^q on r >= a with y(a) = y_a, y'(a) = yp_a.
struct OdeProblem {
  double a = 0.0;
  double y_a = 1.0;
  double yp_a = 1.0;
  double q = 2.0;
  CoefficientSpec b = CoefficientSpec::constant(1.0);

  void validate() const;
};

struct OdeControls {
  double rtol = 1e-8;
  double atol = 1e-12;
  double theta = 0.1;      // step cap theta / sqrt(b y^{q-1})
  double y_blow = 1e10;
  double energy_limit = 1e6;  // energy drift is tracked while y stays below this
};

enum class OdeStatus { BlowUp, GlobalUpTo };

std::string to_string(OdeStatus s);

struct OdeOutcome {
  OdeStatus status = OdeStatus::GlobalUpTo;
  double r_end = 0.0;
  std::optional<double> r_star;
  double y_end = 0.0;
  double refinement_stability = 0.0;  // |R*(rtol) - R*(rtol/2)| / R*(rtol), BlowUp only
  double energy_drift = 0.0;  // relative, only meaningful for constant b
  long steps = 0;
};

/// Adaptive Dormand-Prince integration of the equality case. `with_refinement` repeats the run at
/// half the tolerance to fill refinement_stability.
OdeOutcome integrate_ode(const OdeProblem& prob, double r_max, const OdeControls& controls = {},
                         bool with_refinement = true);

struct OdeCriterion {
  IntegralVerdict divergence;  // \int_a^\infty r^q b(r) dr
  bool alt_bounded = false;    // b <= B / r^{q+1} for large r
  bool alt_monotone = false;   // b nonincreasing for large r
  bool applies = false;
};

OdeCriterion check_ode_blowup_criterion(const CoefficientSpec& b, double q, double a = 0.0,
                                        double t_large = 1e3);

}  // namespace memheat
