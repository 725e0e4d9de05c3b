#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "memheat/errors.hpp"
#include "memheat/pde.hpp"
#include "scenarios.hpp"

using namespace memheat;
using testing::make;

namespace {

std::vector<TracePoint> synthetic(double p, double t_star, double t0, double dt, double threshold) {
  std::vector<TracePoint> out;
  for (double t = t0;; t += dt) {
    TracePoint tp;
    tp.t = t;
    tp.sup_norm = std::pow((p - 1) * (t_star - t), -1.0 / (p - 1));
    tp.dt = dt;
    out.push_back(tp);
    if (tp.sup_norm >= threshold) break;
  }
  return out;
}

}  // namespace

TEST_CASE("constants are steady states of the pure heat flow") {
  const Scenario s = make(2, 2, CoefficientSpec::constant(0), CoefficientSpec::constant(0), InitialSpec::constant(3), 1);
  State st = initial_state(s);
  for (int i = 0; i < 50; ++i) step(st, s, 1e-2);
  for (double v : st.u) CHECK(v == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("uniform reaction step and memory accumulation") {
  const Scenario s = make(2, 1, CoefficientSpec::constant(1), CoefficientSpec::constant(0), InitialSpec::constant(1), 1);
  State st = initial_state(s);
  step(st, s, 1e-3);
  for (double v : st.u) CHECK(v == doctest::Approx(1.001).epsilon(1e-14));

  // no reaction, u = 1: the accumulators measure elapsed time
  const Scenario flat = make(1, 2, CoefficientSpec::constant(0), CoefficientSpec::constant(0), InitialSpec::constant(1), 1);
  State fs = initial_state(flat);
  for (int i = 0; i < 250; ++i) step(fs, flat, 2e-3);
  CHECK(fs.mem_left == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fs.mem_right == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("choose_dt") {
  Scenario s = make(2, 2, CoefficientSpec::constant(1), CoefficientSpec::constant(0), InitialSpec::constant(0), 1);
  const double h = s.spacing();
  State st = initial_state(s);
  CHECK(choose_dt(st, s) == doctest::Approx(std::min(s.controls.dt_max, s.controls.theta * h * h)));

  st.steps = 1;
  std::fill(st.u.begin(), st.u.end(), 1e6);
  CHECK(choose_dt(st, s) <= 1e-7 * (1 + 1e-12));
}

TEST_CASE("refined scenario") {
  const Scenario s = testing::ode_blowup();
  const Scenario r = refined(s, 2);
  CHECK(r.controls.nodes == 4 * (s.controls.nodes - 1) + 1);
  CHECK(r.controls.theta == doctest::Approx(s.controls.theta / 4));
  CHECK(r.controls.dt_max == doctest::Approx(s.controls.dt_max / 4));
}

TEST_CASE("invalid scenarios") {
  Scenario s = testing::ode_blowup();
  s.controls.nodes = 2;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = testing::ode_blowup();
  s.controls.theta = 1.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = testing::ode_blowup();
  s.p = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("blow-up time from synthetic traces") {
  const auto quad = synthetic(2, 1.0, 0.9, 1e-3, 1e6);
  const auto est = estimate_blowup_time(quad, 2, 1e6);
  REQUIRE(est.t_fit);
  CHECK(*est.t_fit == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(*est.fit_quality == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(est.t_cross == doctest::Approx(1.0 - 1e-6).epsilon(1e-6));

  const auto cubic = synthetic(3, 0.5, 0.4, 1e-4, 1e4);
  const auto e3 = estimate_blowup_time(cubic, 3, 1e4);
  REQUIRE(e3.t_fit);
  CHECK(*e3.t_fit == doctest::Approx(0.5).epsilon(1e-9));

  std::vector<TracePoint> flat(30);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    flat[i].t = 0.1 * i;
    flat[i].sup_norm = 1.0;
  }
  CHECK_THROWS_AS(estimate_blowup_time(flat, 2, 1e10), std::invalid_argument);
}

TEST_CASE("run outcomes") {
  const auto zero = run(testing::trivial());
  CHECK(zero.status == RunStatus::GlobalToHorizon);
  CHECK(zero.t_end >= 100.0);
  for (const auto& tp : zero.traces) CHECK(tp.sup_norm <= 1e-12);

  const auto blow = run(testing::ode_blowup());
  REQUIRE(blow.status == RunStatus::BlowUp);
  CHECK(blow.sup_norm_end >= testing::ode_blowup().controls.blowup_threshold);
  REQUIRE(blow.blowup);
  CHECK(std::abs(blow.blowup->t_cross - 1.0) <= 0.02);

  Scenario budget = testing::ode_blowup();
  budget.controls.max_steps = 10;
  const auto cut = run(budget);
  CHECK(cut.status == RunStatus::Aborted);
  CHECK(cut.steps == 10);
}

TEST_CASE("nonnegativity and memory monotonicity") {
  Scenario s = make(2, 2, CoefficientSpec::power(1, 1), CoefficientSpec::constant(1), InitialSpec::cos_bump(1), 1);
  const auto out = run(s);
  CHECK(out.min_relative_undershoot >= -1e-10);
  for (std::size_t i = 1; i < out.traces.size(); ++i) {
    CHECK(out.traces[i].mem_left >= out.traces[i - 1].mem_left);
    CHECK(out.traces[i].mem_right >= out.traces[i - 1].mem_right);
  }
}

TEST_CASE("symmetric data stays symmetric") {
  Scenario s = make(2, 2, CoefficientSpec::constant(1), CoefficientSpec::constant(0.5), InitialSpec::cos_bump(1), 0.5);
  s.controls.keep_fields = true;
  const auto out = run(s);
  REQUIRE_FALSE(out.snapshots.empty());
  for (const auto& snap : out.snapshots) {
    const double scale = std::max(1.0, sup_norm(snap.u));
    const std::size_t n = snap.u.size();
    for (std::size_t i = 0; i < n / 2; ++i) CHECK(std::abs(snap.u[i] - snap.u[n - 1 - i]) <= 1e-10 * scale);
  }
}

TEST_CASE("uniform data converges to the scalar ODE at first order") {
  // u' = u^2, u(0) = 1/2: u(1) = 1
  std::vector<double> err;
  for (double dt : {4e-3, 2e-3, 1e-3, 5e-4}) {
    Scenario s = make(2, 1, CoefficientSpec::constant(1), CoefficientSpec::constant(0), InitialSpec::constant(0.5), 1);
    s.controls.nodes = 11;
    s.controls.dt_max = dt;
    s.controls.dt_init = dt;
    s.controls.theta = 1.0;
    const auto out = run(s);
    REQUIRE(out.status == RunStatus::GlobalToHorizon);
    err.push_back(std::abs(out.sup_norm_end - 1.0));
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double order = std::log2(err[i - 1] / err[i]);
    CHECK(order == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("blow-up time settles under grid refinement") {
  const Scenario s = testing::memory_blowup();
  std::vector<double> tc;
  for (int r = 0; r <= 2; ++r) {
    const auto out = run(refined(s, r));
    REQUIRE(out.blowup);
    tc.push_back(out.blowup->t_cross);
  }
  CHECK(std::abs(tc[2] - tc[1]) < std::abs(tc[1] - tc[0]));
}

TEST_CASE("comparison") {
  const Scenario high =
      make(2, 2, CoefficientSpec::constant(1), CoefficientSpec::constant(1), InitialSpec::constant(1), 2);
  Scenario low = high;
  low.u0 = InitialSpec::constant(0);
  auto rep = verify_comparison(low, high);
  CHECK(rep.holds);
  CHECK(rep.high_status == RunStatus::BlowUp);

  rep = verify_comparison(high, high);
  CHECK(rep.holds);
  CHECK(rep.max_difference <= 1e-12);

  Scenario small = make(2, 2, CoefficientSpec::power(1, 2), CoefficientSpec::power(1, 3), InitialSpec::cos_bump(0.1), 200);
  Scenario half = small;
  half.u0 = InitialSpec::cos_bump(0.05);
  rep = verify_comparison(half, small);
  CHECK(rep.holds);
  CHECK(rep.t_compared >= 200.0);
}

TEST_CASE("mass inequality") {
  // k = 0, uniform: w' = c w^p / L^{p-1} holds up to the step error
  Scenario s = make(2, 1, CoefficientSpec::constant(1), CoefficientSpec::constant(0), InitialSpec::constant(0.5), 1);
  auto out = run(s);
  double wmax = 0.0;
  for (const auto& tp : out.traces) wmax = std::max(wmax, tp.mass_w);
  CHECK(mass_inequality_check(out.traces, s) <= 1e-2 * wmax * wmax);

  s = make(1, 2, CoefficientSpec::constant(1), CoefficientSpec::constant(1), InitialSpec::cos_bump(1), 1);
  CHECK(mass_inequality_check(run(s).traces, s) <= 1e-9);

  s = make(1, 2, CoefficientSpec::constant(0), CoefficientSpec::constant(1), InitialSpec::cos_bump(1), 1);
  out = run(s);
  for (std::size_t i = 1; i < out.traces.size(); ++i) CHECK(out.traces[i].mass_w >= out.traces[i - 1].mass_w);
  CHECK(mass_inequality_check(out.traces, s) == 0.0);

  s.p = 0.5;
  CHECK_THROWS_AS(mass_inequality_check(out.traces, s), NotApplicable);
}

TEST_CASE("initial data") {
  const auto bump = InitialSpec::cos_bump(2).sample(1.0, 5);
  CHECK(bump[0] == doctest::Approx(0.0));
  CHECK(bump[2] == doctest::Approx(2.0));
  CHECK(trapezoid_mass(InitialSpec::constant(3).sample(2.0, 9), 0.25) == doctest::Approx(6.0));

  std::vector<double> tilted(201);
  for (std::size_t i = 0; i < tilted.size(); ++i) tilted[i] = 1.0 + 0.01 * i;
  CHECK_THROWS_AS(InitialSpec::tabulated(tilted).validate(1.0, 201), ConfigError);
  CHECK_THROWS_AS(InitialSpec::constant(-1).validate(1.0, 201), ConfigError);
}
