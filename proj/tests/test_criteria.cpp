#include <cmath>

#include <doctest.h>

#include "memheat/criteria.hpp"
#include "memheat/errors.hpp"
#include "scenarios.hpp"

using namespace memheat;

namespace {

bool is_small_data(Regime r) { return r == Regime::GlobalSmallData || r == Regime::BoundedGlobalSmallData; }

const ConditionRecord* find(const RegimeVerdict& v, const std::string& id) {
  for (const auto& c : v.conditions) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("classifier examples") {
  auto v = classify_regime(0.5, 1, CoefficientSpec::constant(5), CoefficientSpec::constant(5));
  CHECK(v.regime == Regime::GlobalAll);
  CHECK(v.rule == "sublinear-global");

  v = classify_regime(2, 2, CoefficientSpec::constant(1), CoefficientSpec::constant(0));
  CHECK(v.regime == Regime::BlowUpAll);
  CHECK(v.rule == "blowup-reaction");

  v = classify_regime(2, 2, CoefficientSpec::power(1, 2), CoefficientSpec::power(1, 3));
  CHECK(v.regime == Regime::BoundedGlobalSmallData);
  const auto* moment = find(v, "coefficient_moment");
  REQUIRE(moment);
  REQUIRE(moment->integral);
  // \int c + \int t k = 1 + 1/2
  CHECK(moment->integral->value == doctest::Approx(1.5).epsilon(1e-8));

  v = classify_regime(1, 2, CoefficientSpec::constant(0), CoefficientSpec::constant(1));
  CHECK(v.regime == Regime::BlowUpAll);
  CHECK(v.rule == "blowup-memory");

  CHECK_THROWS_AS(classify_regime(-1, 2, CoefficientSpec::constant(0), CoefficientSpec::constant(0)), ConfigError);
}

TEST_CASE("verdict invariants") {
  const std::vector<std::pair<double, double>> exps{{0.5, 0.5}, {1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1.5}, {2, 0.5}};
  const std::vector<CoefficientSpec> coeffs{
      CoefficientSpec::constant(0),          CoefficientSpec::constant(1),
      CoefficientSpec::power(1, 1),          CoefficientSpec::power(1, 2),
      CoefficientSpec::power(1, 3),          CoefficientSpec::power(1, 4),
      CoefficientSpec::exp_decay(1, 4),      CoefficientSpec::power_log(1, 2, 1, 0),
      CoefficientSpec::power_log(1, 2, 1, 1), CoefficientSpec::power_log(1, 3, 1, 0),
      CoefficientSpec::power_log(1, 3, 1, 1),
  };
  for (const auto& [p, q] : exps) {
    for (const auto& c : coeffs) {
      // numeric primitives of power_log c make the p = 1 checks slow; the borderline cases cover them
      if (p == 1.0 && q > 1.0 && c.family == Family::PowerLog) continue;
      for (const auto& k : coeffs) {
        const auto v = classify_regime(p, q, c, k);
        CAPTURE(p);
        CAPTURE(q);
        CAPTURE(v.rule);
        if (v.regime == Regime::GlobalAll) CHECK(std::max(p, q) <= 1.0);
        if (v.regime == Regime::BlowUpAll) {
          CHECK(v.rule.rfind("blowup-", 0) == 0);
          for (const auto& cond : v.conditions) {
            if (cond.integral) CHECK(cond.integral->status != IntegralStatus::Indeterminate);
          }
        }
        if (is_small_data(v.regime)) {
          CHECK(v.rule.rfind("small-data", 0) == 0);
          CHECK(std::min(p, q) >= 1.0);
        }
        if (v.regime == Regime::Indeterminate) CHECK_FALSE(v.conditions.empty());
      }
    }
  }
}

TEST_CASE("blow-up and small-data hypotheses are disjoint on the acceptance table") {
  struct Case {
    double p, q;
    CoefficientSpec c, k;
  };
  std::vector<Case> table{
      {2, 1, CoefficientSpec::constant(1), CoefficientSpec::constant(0)},
      {1, 2, CoefficientSpec::constant(0), CoefficientSpec::constant(1)},
      {2, 2, CoefficientSpec::power(1, 2), CoefficientSpec::power(1, 3)},
      {2, 2, CoefficientSpec::constant(0), CoefficientSpec::power_log(1, 2, 1, 0)},
      {2, 2, CoefficientSpec::power(1, 2), CoefficientSpec::power_log(1, 2, 1, 1)},
      {1, 2, CoefficientSpec::power(1, 1), CoefficientSpec::power_log(1, 3, 1, 0)},
      {1, 2, CoefficientSpec::power(1, 1), CoefficientSpec::power_log(1, 3, 1, 1)},
      {1, 2, CoefficientSpec::power(1, 2), CoefficientSpec::power_log(1, 3, 1, 1)},
      {1, 2, CoefficientSpec::power(1, 2), CoefficientSpec::power(1, 4)},
      {1, 2, CoefficientSpec::constant(1), CoefficientSpec::constant(1)},
  };
  for (const auto& ns : testing::sublinear_set()) table.push_back({ns.s.p, ns.s.q, ns.s.c, ns.s.k});
  for (const auto& cs : table) {
    const bool q_gt = cs.q > 1.0;
    bool blow = false;
    bool small = false;
    if (cs.p > 1.0 && integrate_improper(cs.c, Weight::unit()).diverges()) blow = true;
    if (q_gt && cs.p != 1.0 && integrate_improper(cs.k, Weight::linear()).diverges() &&
        (decays_at_least(cs.k, 2) || weighted_nonincreasing(cs.k, 1 - cs.q)))
      blow = true;
    if (q_gt && cs.p == 1.0) {
      const auto b = check_linear_reaction_blowup(cs.q, cs.c, cs.k);
      if (b.weighted_moment.diverges() && (b.weighted_bound || b.weighted_monotone)) blow = true;
      const auto g = check_linear_reaction_global(cs.q, cs.c, cs.k);
      if (g.weighted_flux_moment.converges() && g.weighted_flux_window.holds) small = true;
    }
    if (q_gt && cs.p > 1.0 && integrate_improper(cs.c, Weight::unit()).converges() &&
        integrate_improper(cs.k, Weight::linear()).converges() && check_memory_window(cs.k).holds)
      small = true;
    CHECK_FALSE((blow && small));
    const auto v = classify_regime(cs.p, cs.q, cs.c, cs.k);
    if (blow) CHECK(v.regime == Regime::BlowUpAll);
    if (small) CHECK(is_small_data(v.regime));
  }
}

TEST_CASE("linear-reaction conditions reduce to the memory conditions at c = 0") {
  const auto zero = CoefficientSpec::constant(0);
  for (const auto& k : {CoefficientSpec::constant(1), CoefficientSpec::power(1, 3), CoefficientSpec::power(1, 2),
                        CoefficientSpec::power_log(1, 2, 1, 0), CoefficientSpec::power_log(1, 2, 1, 1)}) {
    const auto moment = integrate_improper(k, Weight::linear());
    const auto b = check_linear_reaction_blowup(2, zero, k);
    CHECK(b.weighted_moment.status == moment.status);
    if (moment.converges()) CHECK(b.weighted_moment.value == doctest::Approx(moment.value).epsilon(1e-10));

    const auto g = check_linear_reaction_global(2, zero, k);
    CHECK(g.weighted_flux_moment.status == moment.status);
    const auto w = check_memory_window(k);
    CHECK(g.weighted_flux_window.holds == w.holds);
    CHECK(g.weighted_flux_window.sup == doctest::Approx(w.sup).epsilon(1e-10));
  }
}

TEST_CASE("linear-reaction borderline family") {
  const auto c = CoefficientSpec::power(1, 1);
  CHECK(check_linear_reaction_blowup(2, c, CoefficientSpec::power_log(1, 3, 1, 0)).weighted_moment.diverges());
  CHECK(check_linear_reaction_global(2, c, CoefficientSpec::power_log(1, 3, 1, 1)).weighted_flux_moment.converges());
  // k = e^{-2qt} beats the e^{(q-1)t} growth of the weight
  CHECK(check_linear_reaction_blowup(2, CoefficientSpec::constant(1), CoefficientSpec::exp_decay(1, 4))
            .weighted_moment.converges());
}

TEST_CASE("blow-up verdict is monotone in k above a fixed lower bound") {
  ClassifyOptions opts;
  opts.k_lower = CoefficientSpec::power_log(1, 2, 1, 0);
  for (const auto& k : {CoefficientSpec::power_log(1, 2, 1, 0), CoefficientSpec::power_log(3, 2, 1, 0),
                        CoefficientSpec::power(1, 1), CoefficientSpec::constant(1)}) {
    CHECK(classify_regime(2, 2, CoefficientSpec::constant(0), k, opts).regime == Regime::BlowUpAll);
  }
}

TEST_CASE("effective flux") {
  // c = 0: kappa = t k(t)
  const Primitive zero(CoefficientSpec::constant(0));
  CHECK(effective_flux(2, zero, CoefficientSpec::constant(1), 3.0) == doctest::Approx(3.0));
  // c = 1, q = 2, k = 1: e^{-t} (e^{2t} - 1) / 2
  const Primitive one(CoefficientSpec::constant(1));
  CHECK(effective_flux(2, one, CoefficientSpec::constant(1), 1.0) ==
        doctest::Approx(std::exp(-1.0) * (std::exp(2.0) - 1) / 2).epsilon(1e-12));
}
