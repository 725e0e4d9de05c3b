#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "memheat/coeffs.hpp"

namespace memheat {

enum class InitialFamily { Constant, CosBump, Tabulated };

std::string to_string(InitialFamily f);
InitialFamily initial_family_from_string(const std::string& name);

/// Initial data with zero slope at both endpoints.
///   constant  u0 = value
///   cos_bump  u0 = value (1 - cos(2 pi x / L)) / 2
///   tabulated u0 = nodes (one value per grid node)
struct InitialSpec {
  InitialFamily family = InitialFamily::Constant;
  double value = 0.0;
  std::vector<double> nodes;

  static InitialSpec constant(double value);
  static InitialSpec cos_bump(double amplitude);
  static InitialSpec tabulated(std::vector<double> nodes);

  void validate(double length, int node_count) const;
  std::vector<double> sample(double length, int node_count) const;
};

struct SolverControls {
  int nodes = 201;
  double dt_init = 0.0;  // 0 selects theta * h^2
  double dt_max = 1e-3;
  double theta = 0.1;
  double blowup_threshold = 1e10;
  double t_max = 1.0;
  double snapshot_every = 0.0;  // 0 selects t_max / 100
  long max_steps = 50'000'000;
  bool keep_fields = false;  // store u at every snapshot time

  void validate() const;
  double snapshot_interval() const { return snapshot_every > 0.0 ? snapshot_every : t_max / 100.0; }
};

/// u_t = u_xx + c(t) u^p on (0, L), du/dnu = k(t) \int_0^t u^q at x = 0 and x = L.
struct Scenario {
  double length = 1.0;
  double p = 1.0;
  double q = 1.0;
  CoefficientSpec c = CoefficientSpec::constant(0.0);
  CoefficientSpec k = CoefficientSpec::constant(0.0);
  InitialSpec u0 = InitialSpec::constant(0.0);
  SolverControls controls;

  void validate() const;
  double spacing() const { return length / (controls.nodes - 1); }
};

/// Doubles the node count, halves theta and dt_max `times` times.
Scenario refined(Scenario s, int times = 1);

/// Time-dependent ingredients of the discrete problem. The boundary flux at each end is
/// flux_factor(t_n) * accumulator + prescribed_flux(t_{n+1}); the accumulators integrate
/// memory_weight(t) * u_b^q. Reported quantities are multiplied by output_scale(t).
struct ProblemModel {
  double p = 1.0;
  double q = 1.0;
  std::function<double(double)> reaction;         // c(t)
  std::function<double(double)> flux_factor;      // k(t)
  std::function<double(double)> memory_weight;    // 1 for the original problem
  std::function<double(double)> prescribed_flux;  // optional
  std::function<double(double)> output_scale;     // optional, 1 when empty
};

ProblemModel direct_model(const Scenario& s);

struct State {
  double t = 0.0;
  std::vector<double> u;
  double mem_left = 0.0;
  double mem_right = 0.0;
  long steps = 0;
  double last_dt = 0.0;
};

State initial_state(const Scenario& s);

/// One IMEX step: backward-Euler diffusion, explicit reaction and boundary flux (ghost nodes),
/// trapezoid update of the memory accumulators.
void step(State& state, const ProblemModel& model, double h, double dt);
void step(State& state, const Scenario& s, double dt);

/// dt = min(dt_max, theta / (c ||u||^{p-1} + 2 |g| / (h ||u||) + eps)); dt_init before the first step.
double choose_dt(const State& state, const ProblemModel& model, const Scenario& s);
double choose_dt(const State& state, const Scenario& s);

struct TracePoint {
  double t = 0.0;
  double sup_norm = 0.0;
  double mass_w = 0.0;
  double mem_left = 0.0;
  double mem_right = 0.0;
  double dt = 0.0;
};

struct BlowupEstimate {
  double t_cross = 0.0;
  std::optional<double> t_fit;
  std::optional<double> fit_quality;  // R^2 of the u^{1-p} line
};

enum class RunStatus { BlowUp, GlobalToHorizon, Aborted };

std::string to_string(RunStatus s);

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
};

struct SimulationOutcome {
  RunStatus status = RunStatus::Aborted;
  double t_end = 0.0;
  double sup_norm_end = 0.0;
  std::optional<BlowupEstimate> blowup;
  std::vector<TracePoint> traces;
  std::vector<Snapshot> snapshots;  // filled when controls.keep_fields
  std::vector<double> accepted_dts;
  std::string reason;
  long steps = 0;
  double min_relative_undershoot = 0.0;  // min over steps of min_i u_i / ||u||
};

SimulationOutcome run(const Scenario& s);
SimulationOutcome run(const Scenario& s, const ProblemModel& model);

/// Extrapolated blow-up time from a trace ending above `threshold`. Throws std::invalid_argument
/// when the trace never reaches the threshold.
BlowupEstimate estimate_blowup_time(const std::vector<TracePoint>& trace, double p, double threshold);

struct ComparisonReport {
  bool holds = true;
  double max_violation = 0.0;  // max of (u_low - u_high - tol)_+
  double t_compared = 0.0;     // comparison horizon actually covered
  RunStatus low_status = RunStatus::GlobalToHorizon;
  RunStatus high_status = RunStatus::GlobalToHorizon;
  double max_difference = 0.0;  // max |u_low - u_high|, for determinism checks
};

/// Runs both scenarios in lockstep on a shared time grid and checks u_low <= u_high + tol at every
/// node and step, tol = 1e-8 (1 + ||u_high||).
ComparisonReport verify_comparison(const Scenario& low, const Scenario& high);

/// max over consecutive trace points of (|Omega|^{1-p} min c w^p - w')_+, w' by forward difference.
double mass_inequality_check(const std::vector<TracePoint>& trace, const Scenario& s);

/// Trapezoid of u over the grid.
double trapezoid_mass(const std::vector<double>& u, double h);

double sup_norm(const std::vector<double>& u);

}  // namespace memheat
