#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "memheat/coeffs.hpp"
#include "memheat/pde.hpp"

namespace memheat {

/// v = u e^{-C(t)} for p = 1: v_t = v_xx with flux k(t) e^{-C(t)} A(t), where
/// A(t) = \int_0^t e^{q C(tau)} v^q(x_b, tau) dtau.
struct TransformedScenario {
  Scenario base;
  std::shared_ptr<const Primitive> cumulative;

  double C(double t) const { return cumulative->value(t); }
  /// exp(q C(tau) - C(t)), the kernel of the transformed memory term.
  double rho(double t, double tau) const;
  /// Solver ingredients; reported norms are mapped back by e^{C(t)}.
  ProblemModel model() const;
};

/// Throws NotApplicable unless p = 1.
TransformedScenario to_transformed(const Scenario& s);

std::vector<double> from_transformed(const std::vector<double>& v, const Primitive& c, double t);
std::vector<double> from_transformed(const std::vector<double>& v, const CoefficientSpec& c, double t);

struct EquivalenceReport {
  double discrepancy = 0.0;  // max over shared snapshots of ||u - v e^C|| / (1 + ||u||)
  double t_compared = 0.0;
  std::size_t snapshots = 0;
  RunStatus direct_status = RunStatus::Aborted;
  RunStatus transformed_status = RunStatus::Aborted;
  std::optional<double> direct_t_cross;
  std::optional<double> transformed_t_cross;
  bool status_agree = false;
};

/// Solves the original and the transformed problem up to `horizon` and compares them at the
/// snapshot times both runs reach.
EquivalenceReport equivalence_check(const Scenario& s, double horizon);

}  // namespace memheat
