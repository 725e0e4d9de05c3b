#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memheat/coeffs.hpp"
#include "memheat/pde.hpp"

namespace memheat {

struct Eigenpair {
  double lambda1 = 0.0;
  std::vector<double> phi;  // sin(pi x / L) on the grid, sup = 1
  double inward_slope = 0.0;  // -d phi / d nu at either end, pi / L
};

Eigenpair dirichlet_eigenpair(double length, int nodes);

/// Heat flow y_t = y_xx, y(x, 0) = 1, dy/dnu = flux(t) at both ends. Fields are stored at every
/// step up to t_store; the bound is the running sup over the whole horizon.
struct AuxiliaryTrajectory {
  double length = 1.0;
  std::vector<double> times;
  std::vector<std::vector<double>> fields;
  double bound = 1.0;
  bool stabilized = false;
  double horizon = 0.0;

  /// Linear interpolation in time between stored levels.
  std::vector<double> at(double t) const;
};

struct AuxiliaryControls {
  int nodes = 201;
  double t_store = 1.0;
  double horizon = 1e5;
  double dt_fraction = 0.01;  // dt = dt_fraction (1 + t), capped by dt_cap and 1.2 x the last step
  double dt_cap = 1e3;
  double dt_first = 1e-4;
};

AuxiliaryTrajectory solve_auxiliary_linear(const std::function<double(double)>& flux, double length,
                                           const AuxiliaryControls& controls);

/// z(t) = (1 + (p-1) (alpha Y)^{p-1} \int_t^\infty c)^{-1/(p-1)}. Throws NotApplicable when the tail
/// of c diverges.
double z_profile(double p, double alpha, double bound, const CoefficientSpec& c, double t);
double z_profile(double p, double alpha, double bound, const Primitive& c, double t);

/// z' - (alpha Y)^{p-1} c z^p with z' from a five-point difference of z_profile.
double z_residual(double p, double alpha, double bound, const CoefficientSpec& c, double t, double step = 1e-3);

/// alpha z(0).
double small_data_threshold(double p, double alpha, double bound, const CoefficientSpec& c);

enum class SupersolutionKind { Sublinear, SmallData, LinearReaction };

std::string to_string(SupersolutionKind k);

struct SupersolutionSpec {
  SupersolutionKind kind = SupersolutionKind::Sublinear;
  double length = 1.0;
  int nodes = 201;
  double p = 1.0;
  double q = 1.0;
  CoefficientSpec c = CoefficientSpec::constant(0.0);
  double horizon = 1.0;  // T

  // d e^{bt} (2 - phi)
  double d = 1.0;
  double b = 0.0;
  double coefficient_max = 0.0;  // M
  double lambda1 = 0.0;
  int time_refinement = 1;  // time levels per unit of the base grid

  // alpha z(t) y(x,t)  or  alpha e^{C(t)} h(x,t)
  double alpha = 0.0;
  double bound = 1.0;  // Y or H
  bool bound_stabilized = true;
  bool bounded_in_time = true;  // LinearReaction: \int_0^\infty c < \infty
  std::shared_ptr<const Primitive> cumulative;  // C(t)
  std::shared_ptr<const AuxiliaryTrajectory> aux;
  std::function<double(double)> aux_flux;
  AuxiliaryControls aux_controls;

  /// The supersolution on the grid at time t.
  std::vector<double> field(double t) const;
  /// Time levels used by verify_supersolution.
  std::vector<double> time_grid() const;
  /// Same parameters (d, b, alpha, bound) on a grid with h and dt halved.
  SupersolutionSpec refined() const;
};

/// Exponential-in-time supersolution for max(p, q) <= 1. Throws NotApplicable otherwise.
SupersolutionSpec build_sublinear_supersolution(const Scenario& s, double horizon);

/// alpha z(t) y(x,t) for min(p, q) > 1. `alpha` caps the admissible value Y^{-q/(q-1)}.
SupersolutionSpec build_small_data_supersolution(const Scenario& s, double horizon,
                                                 std::optional<double> alpha = std::nullopt,
                                                 const AuxiliaryControls& aux = {});

/// alpha e^{C(t)} h(x,t) for p = 1 < q.
SupersolutionSpec build_linear_reaction_supersolution(const Scenario& s, double horizon,
                                                      std::optional<double> alpha = std::nullopt,
                                                      const AuxiliaryControls& aux = {});

/// Initial-data bound of the small-data constructions: alpha z(0) for min(p, q) > 1, alpha for
/// p = 1 < q. Throws NotApplicable when neither construction is available.
double small_data_bound(const Scenario& s);

struct InequalityResidual {
  std::string name;  // interior, boundary, initial
  double min_residual = 0.0;
  double x = 0.0;
  double t = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ResidualReport {
  std::vector<InequalityResidual> inequalities;
  bool pass = false;
};

/// Residuals of the three supersolution inequalities on the space-time grid, each normalized by
/// 1 + (size of the terms involved). tol = 1e-6 + C_disc (h^2 + dt), C_disc from one refinement.
ResidualReport verify_supersolution(const SupersolutionSpec& spec, const Scenario& s);

/// Raw residual minima on the spec's own grid, without calibration.
std::vector<InequalityResidual> supersolution_residuals(const SupersolutionSpec& spec, const Scenario& s);

struct DominationReport {
  bool holds = true;
  double max_violation = 0.0;  // max of (u - ubar - tol_cmp)_+
  double min_margin = 0.0;     // min of ubar - u
  std::size_t snapshots = 0;
};

/// u <= ubar + 1e-8 (1 + ||ubar||) at every stored snapshot with t <= spec.horizon.
DominationReport check_domination(const SimulationOutcome& run, const SupersolutionSpec& spec);

}  // namespace memheat
