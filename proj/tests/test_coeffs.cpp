#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include "memheat/coeffs.hpp"
#include "memheat/errors.hpp"

using namespace memheat;

namespace {
const double e = boost::math::constants::e<double>();
}

TEST_CASE("eval_coeff families") {
  CHECK(eval_coeff(CoefficientSpec::constant(1), 5) == 1.0);
  CHECK(eval_coeff(CoefficientSpec::power(1, 2), 1) == doctest::Approx(0.25).epsilon(1e-15));
  // shift T_1 = e puts e^2 - e at ln(e^2) = 2
  CHECK(eval_coeff(CoefficientSpec::power_log(1, 2, 1, 0), e * e - e) ==
        doctest::Approx(1.0 / (2.0 * std::pow(e, 4))).epsilon(1e-13));
  CHECK(eval_coeff(CoefficientSpec::exp_decay(3, 2), 0.5) == doctest::Approx(3.0 / e).epsilon(1e-15));
  const auto tab = CoefficientSpec::tabulated({{0, 1}, {2, 3}});
  CHECK(eval_coeff(tab, 1) == doctest::Approx(2.0));
  CHECK(eval_coeff(tab, 10) == doctest::Approx(3.0));
}

TEST_CASE("invalid coefficients are rejected") {
  CHECK_THROWS_AS(CoefficientSpec::tabulated({}).validate(), ConfigError);
  CHECK_THROWS_AS(CoefficientSpec::power(-1, 2).validate(), ConfigError);
  CHECK_THROWS_AS(family_from_string("gaussian"), ConfigError);
}

TEST_CASE("iterated logarithms") {
  CHECK(iterated_log(1, e) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(iterated_log(2, std::exp(e)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(log_product(2, std::exp(e)) == doctest::Approx(e).epsilon(1e-14));
  CHECK(log_product(1, 2.0, e * e) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(log_tower(2) == doctest::Approx(std::exp(e)));
  CHECK_THROWS_AS(iterated_log(2, 0.5), DomainError);

  for (double t : {3.0, 20.0, 1e4}) {
    for (int j = 1; j <= 2; ++j) {
      if (t <= log_tower(j - 1)) continue;
      CHECK(log_product(j, 1.5, t) ==
            doctest::Approx(log_product(j, t) * std::pow(iterated_log(j, t), 1.5)).epsilon(1e-14));
    }
  }
}

TEST_CASE("improper integrals") {
  CHECK(integrate_improper(CoefficientSpec::constant(1), Weight::unit()).diverges());

  const auto v = integrate_improper(CoefficientSpec::power(1, 3), Weight::linear());
  REQUIRE(v.converges());
  CHECK(v.value == doctest::Approx(0.5).epsilon(1e-10));
  boost::math::quadrature::tanh_sinh<double> ts;
  const double direct = ts.integrate([](double t) { return t / std::pow(1 + t, 3); }, 0.0,
                                     std::numeric_limits<double>::infinity());
  CHECK(v.value == doctest::Approx(direct).epsilon(1e-9));

  CHECK(integrate_improper(CoefficientSpec::power_log(1, 2, 1, 0), Weight::linear()).diverges());
  CHECK(integrate_improper(CoefficientSpec::power_log(1, 2, 1, 1), Weight::linear()).converges());
  CHECK(integrate_improper(CoefficientSpec::constant(0), Weight::power(5)).converges());
}

TEST_CASE("forced numeric path agrees with closed forms") {
  QuadraturePolicy numeric;
  numeric.force_numeric = true;
  for (double gamma : {0.5, 1.5, 2.5}) {
    for (Weight w : {Weight::unit(), Weight::linear()}) {
      CAPTURE(gamma);
      CAPTURE(w.exponent);
      const auto spec = CoefficientSpec::power(1, gamma);
      const auto closed = integrate_improper(spec, w);
      const auto forced = integrate_improper(spec, w, 0.0, numeric);
      CHECK(closed.status != IntegralStatus::Indeterminate);
      CHECK(forced.status == closed.status);
      if (closed.converges()) CHECK(forced.value == doctest::Approx(closed.value).epsilon(1e-4));
    }
  }
}

TEST_CASE("memory window") {
  const auto zero = check_memory_window(CoefficientSpec::constant(0));
  CHECK(zero.sup == 0.0);
  CHECK(zero.holds);

  // J(t) = 2 t - 2/3 for k = 1
  const auto flat = check_memory_window(CoefficientSpec::constant(1), 1.0, 2.0, 1e4);
  CHECK_FALSE(flat.holds);
  CHECK(flat.sup == doctest::Approx(2e4 - 2.0 / 3.0).epsilon(1e-10));

  // tau k(tau) decreases past tau = 1/2, so the supremum sits at t = alpha.
  const auto k3 = CoefficientSpec::power(1, 3);
  const auto w = check_memory_window(k3, 1.0, 2.0, 1e4);
  CHECK(w.holds);
  boost::math::quadrature::tanh_sinh<double> ts;
  const double direct = ts.integrate(
      [&](double tau, double dist) { return tau * eval_coeff(k3, tau) / std::sqrt(tau > 1.5 ? dist : 2.0 - tau); }, 1.0,
      2.0);
  CHECK(w.sup == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("large-t alternatives") {
  CHECK(decays_at_least(CoefficientSpec::power(1, 2), 2));
  CHECK_FALSE(decays_at_least(CoefficientSpec::power(1, 1.5), 2));
  CHECK(decays_at_least(CoefficientSpec::exp_decay(1, 1), 10));
  CHECK(weighted_nonincreasing(CoefficientSpec::constant(1), -1));
  CHECK_FALSE(weighted_nonincreasing(CoefficientSpec::power(1, 1), 2));
}

TEST_CASE("primitive") {
  const Primitive c1(CoefficientSpec::constant(1));
  CHECK(c1.value(2.5) == doctest::Approx(2.5));
  CHECK(std::isinf(c1.total()));
  CHECK(c1.log_exp_moment(2.0, 1.0) == doctest::Approx(std::log((std::exp(2.0) - 1) / 2)).epsilon(1e-12));

  const Primitive c2(CoefficientSpec::power(1, 2));
  CHECK(c2.value(3.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(c2.total() == doctest::Approx(1.0));

  const auto pl = CoefficientSpec::power_log(1, 2, 1, 1);
  const Primitive c3(pl);
  const double direct = integrate_finite([&](double t) { return eval_coeff(pl, t); }, 0.0, 50.0);
  CHECK(c3.value(50.0) == doctest::Approx(direct).epsilon(1e-8));
}
