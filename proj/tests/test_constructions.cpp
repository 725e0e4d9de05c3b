#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <doctest.h>

#include "memheat/constructions.hpp"
#include "memheat/errors.hpp"
#include "scenarios.hpp"

using namespace memheat;
using testing::make;

namespace {

const double pi = boost::math::constants::pi<double>();

const InequalityResidual& named(const ResidualReport& r, const std::string& name) {
  for (const auto& ineq : r.inequalities) {
    if (ineq.name == name) return ineq;
  }
  throw std::runtime_error("missing inequality " + name);
}

double eigen_defect(int nodes) {
  const auto e = dirichlet_eigenpair(1.0, nodes);
  const double h = 1.0 / (nodes - 1);
  double worst = 0.0;
  for (int i = 1; i + 1 < nodes; ++i) {
    const double lap = (e.phi[i - 1] - 2 * e.phi[i] + e.phi[i + 1]) / (h * h);
    worst = std::max(worst, std::abs(lap + e.lambda1 * e.phi[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("dirichlet eigenpair") {
  CHECK(dirichlet_eigenpair(pi, 101).lambda1 == doctest::Approx(1.0));
  const auto e = dirichlet_eigenpair(1.0, 201);
  CHECK(e.lambda1 == doctest::Approx(pi * pi));
  CHECK(e.phi[100] == doctest::Approx(1.0));
  CHECK(e.phi.front() == 0.0);
  CHECK(e.phi.back() == 0.0);
  for (int i = 1; i < 200; ++i) CHECK(e.phi[i] > 0.0);
  CHECK(e.inward_slope == doctest::Approx(pi));

  const double order = std::log2(eigen_defect(51) / eigen_defect(101));
  CHECK(order == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("sublinear supersolution parameters") {
  Scenario s = make(0.5, 0.5, CoefficientSpec::constant(1), CoefficientSpec::constant(1), InitialSpec::constant(0.3), 10);
  const auto spec = build_sublinear_supersolution(s, 10);
  CHECK(spec.coefficient_max == doctest::Approx(1.0));
  CHECK(spec.b == doctest::Approx(pi * pi + 2));
  CHECK(spec.d == 1.0);

  s.u0 = InitialSpec::constant(3);
  CHECK(build_sublinear_supersolution(s, 10).d == 3.0);

  s.q = 2;
  CHECK_THROWS_AS(build_sublinear_supersolution(s, 10), NotApplicable);
}

TEST_CASE("sublinear supersolution residuals") {
  const Scenario s =
      make(1, 1, CoefficientSpec::constant(0), CoefficientSpec::constant(0), InitialSpec::cos_bump(1), 2);
  const auto spec = build_sublinear_supersolution(s, 2);
  CHECK(spec.b == doctest::Approx(pi * pi));
  const auto rep = verify_supersolution(spec, s);
  CHECK(rep.pass);
  for (const auto& r : rep.inequalities) CHECK(r.min_residual >= -r.tolerance);
}

TEST_CASE("deliberate violations fail") {
  // on a long interval the boundary bound on b dominates
  Scenario s = make(1, 1, CoefficientSpec::constant(1), CoefficientSpec::constant(1), InitialSpec::constant(1), 2);
  s.length = 10;
  auto spec = build_sublinear_supersolution(s, 2);
  CHECK(verify_supersolution(spec, s).pass);
  spec.b *= 0.5;
  const auto rep = verify_supersolution(spec, s);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(named(rep, "boundary").pass);

  Scenario unit = make(1, 1, CoefficientSpec::constant(0), CoefficientSpec::constant(0), InitialSpec::constant(1), 1);
  auto zero = build_sublinear_supersolution(unit, 1);
  zero.d = 0.0;
  const auto zr = verify_supersolution(zero, unit);
  CHECK_FALSE(zr.pass);
  CHECK(named(zr, "initial").min_residual < 0.0);
}

TEST_CASE("auxiliary heat flow") {
  AuxiliaryControls ctl;
  ctl.nodes = 51;
  ctl.horizon = 1e4;
  const auto flat = solve_auxiliary_linear([](double) { return 0.0; }, 1.0, ctl);
  CHECK(flat.bound == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(flat.stabilized);
  for (double v : flat.at(0.5)) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

  const auto decaying = solve_auxiliary_linear([](double t) { return t / std::pow(1 + t, 3); }, 1.0, ctl);
  CHECK(decaying.stabilized);
  CHECK(decaying.bound > 1.0);
  CHECK(std::isfinite(decaying.bound));

  const auto growing = solve_auxiliary_linear([](double t) { return t; }, 1.0, ctl);
  CHECK_FALSE(growing.stabilized);
}

TEST_CASE("z profile") {
  const auto zero = CoefficientSpec::constant(0);
  CHECK(z_profile(2, 1, 1, zero, 3) == 1.0);
  const auto c2 = CoefficientSpec::power(1, 2);
  double prev = 0.0;
  for (double t : {0.0, 0.5, 1.0, 10.0, 100.0}) {
    const double z = z_profile(2, 1, 1, c2, t);
    CHECK(z == doctest::Approx((1 + t) / (2 + t)).epsilon(1e-12));
    CHECK(z > prev);
    prev = z;
    CHECK(std::abs(z_residual(2, 1, 1, c2, t)) <= 1e-8);
  }
  CHECK(small_data_threshold(2, 1, 1, c2) == doctest::Approx(0.5));
  CHECK(small_data_threshold(2, 0.3, 1, zero) == doctest::Approx(0.3));
  CHECK_THROWS_AS(z_profile(2, 1, 1, CoefficientSpec::constant(1), 0), NotApplicable);
}

TEST_CASE("small-data construction reductions") {
  AuxiliaryControls ctl;
  ctl.nodes = 51;
  Scenario s = make(2, 2, CoefficientSpec::power(1, 2), CoefficientSpec::constant(0), InitialSpec::constant(0.1), 5);
  s.controls.nodes = 51;
  const auto no_flux = build_small_data_supersolution(s, 5, std::nullopt, ctl);
  CHECK(no_flux.bound == doctest::Approx(1.0).epsilon(1e-9));
  for (double t : {0.0, 1.0, 4.0}) {
    const double z = z_profile(2, no_flux.alpha, no_flux.bound, s.c, t);
    for (double v : no_flux.field(t)) CHECK(v == doctest::Approx(no_flux.alpha * z).epsilon(1e-12));
  }

  s.c = CoefficientSpec::constant(0);
  s.k = CoefficientSpec::power(1, 3);
  const auto no_reaction = build_small_data_supersolution(s, 5, std::nullopt, ctl);
  for (double t : {0.0, 1.0, 4.0}) {
    const auto y = no_reaction.aux->at(t);
    const auto f = no_reaction.field(t);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == doctest::Approx(no_reaction.alpha * y[i]).epsilon(1e-12));
  }

  // the p = 1 construction at c = 0 uses the same flux t k(t)
  Scenario lin = s;
  lin.p = 1;
  const auto h = build_linear_reaction_supersolution(lin, 5, std::nullopt, ctl);
  CHECK(h.alpha == doctest::Approx(no_reaction.alpha));
  const auto a = h.field(3.0);
  const auto b = no_reaction.field(3.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("small-data supersolution") {
  Scenario s = testing::small_data_base();
  s.controls.t_max = 20;
  s.u0 = InitialSpec::constant(0.5 * small_data_bound(s));
  const auto spec = build_small_data_supersolution(s, 20);
  CHECK(spec.bound_stabilized);
  // admissibility alpha^{q-1} Y^q <= 1
  CHECK(std::pow(spec.alpha, s.q - 1) * std::pow(spec.bound, s.q) <= 1.0 + 1e-12);
  CHECK(verify_supersolution(spec, s).pass);

  s.controls.keep_fields = true;
  const auto dom = check_domination(run(s), spec);
  CHECK(dom.holds);
  CHECK(dom.snapshots > 0);
}

TEST_CASE("linear-reaction supersolution") {
  Scenario s = testing::transform_small();
  const auto bounded = build_linear_reaction_supersolution(s, 10);
  CHECK(bounded.bounded_in_time);
  CHECK(std::pow(bounded.alpha, s.q - 1) * std::pow(bounded.bound, s.q) <= 1.0 + 1e-12);
  CHECK(verify_supersolution(bounded, s).pass);

  s.c = CoefficientSpec::power(1, 1);
  s.k = CoefficientSpec::power(1, 4);
  CHECK_FALSE(build_linear_reaction_supersolution(s, 10).bounded_in_time);

  s.p = 2;
  CHECK_THROWS_AS(build_linear_reaction_supersolution(s, 10), NotApplicable);
}
