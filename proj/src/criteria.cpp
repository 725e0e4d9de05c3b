#include "memheat/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "memheat/errors.hpp"
#include "sampling.hpp"

namespace memheat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double log_or_neg_inf(double v) { return v > 0.0 ? std::log(v) : -kInf; }

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

// Large-t behaviour of C(t) = \int_0^t c.
enum class Growth { Bounded, Exponential, PowerLaw, Stretched, Other };

struct GrowthClass {
  Growth kind = Growth::Other;
  double rate = 0.0;  // exponential rate, or beta for c ~ beta/t
};

GrowthClass classify_growth(const CoefficientSpec& c) {
  if (c.is_zero()) return {Growth::Bounded, 0.0};
  const double a = c.amplitude;
  auto by_exponent = [&](double g) -> GrowthClass {
    if (g > 1.0 && !near(g, 1.0)) return {Growth::Bounded, 0.0};
    if (near(g, 1.0)) return {Growth::PowerLaw, a};
    if (near(g, 0.0)) return {Growth::Exponential, a};
    if (g > 0.0) return {Growth::Stretched, 0.0};
    return {Growth::Other, 0.0};
  };
  switch (c.family) {
    case Family::Constant:
      return {Growth::Exponential, a};
    case Family::ExpDecay:
      return c.lambda > 0.0 ? GrowthClass{Growth::Bounded, 0.0} : GrowthClass{Growth::Exponential, a};
    case Family::Power:
      return by_exponent(c.gamma);
    case Family::PowerLog:
      if (c.log_depth == 0) return by_exponent(c.gamma + c.log_power);
      if (c.gamma > 1.0 && !near(c.gamma, 1.0)) return {Growth::Bounded, 0.0};
      if (near(c.gamma, 1.0)) return c.log_power > 0.0 ? GrowthClass{Growth::Bounded, 0.0} : GrowthClass{};
      if (c.gamma > 0.0) return {Growth::Stretched, 0.0};
      return {};
    case Family::Tabulated:
      return c.tail_value() > 0.0 ? GrowthClass{Growth::Exponential, c.tail_value()}
                                  : GrowthClass{Growth::Bounded, 0.0};
  }
  return {};
}

// Verdict for \int t^m e^{rho t} k(t) dt (rho > 0).
IntegralStatus exponential_weight_rule(const CoefficientSpec& k, double rho, double m) {
  if (k.is_zero()) return IntegralStatus::Converges;
  switch (k.family) {
    case Family::ExpDecay:
      if (k.lambda > rho && !near(k.lambda, rho)) return IntegralStatus::Converges;
      if (near(k.lambda, rho)) return m < -1.0 ? IntegralStatus::Converges : IntegralStatus::Diverges;
      return IntegralStatus::Diverges;
    case Family::Tabulated:
      return k.tail_value() > 0.0 ? IntegralStatus::Diverges : IntegralStatus::Converges;
    default:
      return IntegralStatus::Diverges;
  }
}

// Verdict for \int w(t) k(t) dt with w a stretched exponential exp(O(t^{1-gamma})).
IntegralStatus stretched_weight_rule(const CoefficientSpec& k) {
  if (k.is_zero()) return IntegralStatus::Converges;
  switch (k.family) {
    case Family::ExpDecay:
      return k.lambda > 0.0 ? IntegralStatus::Converges : IntegralStatus::Diverges;
    case Family::Tabulated:
      return k.tail_value() > 0.0 ? IntegralStatus::Diverges : IntegralStatus::Converges;
    default:
      return IntegralStatus::Diverges;
  }
}

enum class WeightedKind { BlowupMoment, FluxMoment };

// \int_0^\infty of t^{1-q} e^{-C} (\int e^C)^q k  (BlowupMoment)  or  k e^{-C} \int e^{qC}  (FluxMoment).
IntegralVerdict weighted_moment(WeightedKind kind, double q, const CoefficientSpec& c, const CoefficientSpec& k,
                                const QuadraturePolicy& policy) {
  if (c.is_zero()) {
    IntegralVerdict v = integrate_improper(k, Weight::linear(), 0.0, policy);
    v.evidence = "c vanishes, weights collapse to t: " + v.evidence;
    return v;
  }
  const Primitive prim(c);
  const auto log_integrand = [&](double t) {
    if (t <= 0.0) return -kInf;
    const double lk = log_or_neg_inf(eval_coeff(k, t));
    if (lk == -kInf) return -kInf;
    if (kind == WeightedKind::BlowupMoment) {
      return (1.0 - q) * std::log(t) - prim.value(t) + q * prim.log_exp_moment(1.0, t) + lk;
    }
    return lk - prim.value(t) + prim.log_exp_moment(q, t);
  };
  const GrowthClass g = classify_growth(c);
  std::optional<IntegralStatus> status;
  std::string rule;
  double tail = 0.0;
  switch (g.kind) {
    case Growth::Bounded: {
      const auto kv = integrate_improper(k, Weight::linear(), 0.0, policy);
      status = kv.status;
      rule = "C(t) bounded, integrand ~ const * t k(t): " + kv.evidence;
      if (kv.converges()) {
        const double ctot = prim.total();
        tail = std::exp((q - 1.0) * ctot) * integrate_improper(k, Weight::linear(), policy.t_max, policy).value;
      }
      break;
    }
    case Growth::PowerLaw: {
      const double m = 1.0 + g.rate * (q - 1.0);
      const auto kv = integrate_improper(k, Weight::power(m), 0.0, policy);
      status = kv.status;
      rule = "c ~ " + fmt(g.rate) + "/t, integrand ~ const * t^" + fmt(m) + " k(t): " + kv.evidence;
      if (kv.converges()) {
        const double factor = kind == WeightedKind::BlowupMoment ? std::pow(g.rate + 1.0, -q)
                                                                  : 1.0 / (q * g.rate + 1.0);
        tail = factor * integrate_improper(k, Weight::power(m), policy.t_max, policy).value;
      }
      break;
    }
    case Growth::Exponential: {
      const double rho = (q - 1.0) * g.rate;
      const double m = kind == WeightedKind::BlowupMoment ? 1.0 - q : 0.0;
      status = exponential_weight_rule(k, rho, m);
      rule = "C(t) ~ " + fmt(g.rate) + " t, integrand ~ t^" + fmt(m) + " e^{" + fmt(rho) + " t} k(t)";
      break;
    }
    case Growth::Stretched:
      status = stretched_weight_rule(k);
      rule = "C(t) grows like a fractional power, weight is a stretched exponential";
      break;
    case Growth::Other:
      break;
  }
  QuadraturePolicy numeric = policy;
  numeric.force_numeric = true;
  IntegralVerdict nv = integrate_improper_numeric(log_integrand, 0.0, numeric);
  if (!status) return nv;
  IntegralVerdict v;
  v.status = *status;
  v.value = v.converges() ? nv.value + tail : nv.value;
  v.evidence = "closed form: " + rule + "; " + nv.evidence;
  return v;
}

ConditionRecord integral_record(std::string id, IntegralVerdict v) {
  ConditionRecord r;
  r.id = std::move(id);
  r.evidence = v.evidence;
  r.integral = std::move(v);
  return r;
}

ConditionRecord flag_record(std::string id, bool flag, std::string evidence) {
  ConditionRecord r;
  r.id = std::move(id);
  r.flag = flag;
  r.evidence = std::move(evidence);
  return r;
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::GlobalAll: return "GlobalAll";
    case Regime::BlowUpAll: return "BlowUpAll";
    case Regime::GlobalSmallData: return "GlobalSmallData";
    case Regime::BoundedGlobalSmallData: return "BoundedGlobalSmallData";
    case Regime::Indeterminate: return "Indeterminate";
  }
  return "?";
}

bool ConditionRecord::certified(IntegralStatus want) const {
  if (integral) return integral->status == want;
  return flag.value_or(false);
}

double effective_flux(double q, const Primitive& c, const CoefficientSpec& k, double t) {
  if (t <= 0.0) return 0.0;
  const double kt = eval_coeff(k, t);
  if (kt <= 0.0) return 0.0;
  return std::exp(std::log(kt) - c.value(t) + c.log_exp_moment(q, t));
}

LinearReactionBlowup check_linear_reaction_blowup(double q, const CoefficientSpec& c, const CoefficientSpec& k_lower,
                                                  double t_large, const QuadraturePolicy& policy) {
  if (!(q > 1.0)) throw NotApplicable("linear-reaction blow-up conditions need q > 1");
  c.validate();
  k_lower.validate();
  LinearReactionBlowup out;
  out.weighted_moment = weighted_moment(WeightedKind::BlowupMoment, q, c, k_lower, policy);
  if (c.is_zero()) {
    out.weighted_bound = decays_at_least(k_lower, 2.0, t_large);
    out.weighted_monotone = weighted_nonincreasing(k_lower, 1.0 - q, t_large);
    return out;
  }
  const Primitive prim(c);
  const double t_end = std::max(t_large * 1e4, 1e7);
  out.weighted_bound = detail::sampled_bounded(
      [&](double t) {
        const double lk = log_or_neg_inf(eval_coeff(k_lower, t));
        if (lk == -kInf) return -kInf;
        return (1.0 - q) * std::log(t) - 2.0 * prim.value(t) + (q + 1.0) * prim.log_exp_moment(1.0, t) + lk;
      },
      t_large, t_end);
  out.weighted_monotone = detail::sampled_nonincreasing(
      [&](double t) {
        const double lk = log_or_neg_inf(eval_coeff(k_lower, t));
        if (lk == -kInf) return -kInf;
        return (1.0 - q) * std::log(t) - 2.0 * prim.value(t) + lk;
      },
      t_large, t_end);
  return out;
}

LinearReactionGlobal check_linear_reaction_global(double q, const CoefficientSpec& c, const CoefficientSpec& k,
                                                  double t0, double alpha, double t_probe,
                                                  const QuadraturePolicy& policy) {
  if (!(q > 1.0)) throw NotApplicable("linear-reaction global conditions need q > 1");
  c.validate();
  k.validate();
  LinearReactionGlobal out;
  out.weighted_flux_moment = weighted_moment(WeightedKind::FluxMoment, q, c, k, policy);
  if (c.is_zero()) {
    out.weighted_flux_window = check_memory_window(k, t0, alpha, t_probe);
  } else {
    const Primitive prim(c);
    out.weighted_flux_window =
        window_supremum([&](double t) { return effective_flux(q, prim, k, t); }, t0, alpha, t_probe);
  }
  out.reaction_integral = integrate_improper(c, Weight::unit(), 0.0, policy);
  return out;
}

RegimeVerdict classify_regime(double p, double q, const CoefficientSpec& c, const CoefficientSpec& k,
                              const ClassifyOptions& options) {
  if (!(p > 0.0)) throw ConfigError("exponents.p must be > 0");
  if (!(q > 0.0)) throw ConfigError("exponents.q must be > 0");
  c.validate();
  k.validate();
  const CoefficientSpec& kl = options.k_lower ? *options.k_lower : k;
  kl.validate();
  const auto& policy = options.policy;

  RegimeVerdict v;
  auto finish = [&](Regime r, std::string rule) {
    v.regime = r;
    v.rule = std::move(rule);
    if (r == Regime::GlobalSmallData || r == Regime::BoundedGlobalSmallData) {
      v.note = "small initial data only; unresolved for large data";
    }
    return v;
  };

  if (std::max(p, q) <= 1.0) {
    v.conditions.push_back(flag_record("sublinear_exponents", true, "max(p,q) = " + fmt(std::max(p, q)) + " <= 1"));
    return finish(Regime::GlobalAll, "sublinear-global");
  }

  std::optional<IntegralVerdict> c_integral;
  auto reaction_integral = [&]() -> const IntegralVerdict& {
    if (!c_integral) c_integral = integrate_improper(c, Weight::unit(), 0.0, policy);
    return *c_integral;
  };

  if (p > 1.0) {
    v.conditions.push_back(integral_record("reaction_integral", reaction_integral()));
    if (reaction_integral().diverges()) return finish(Regime::BlowUpAll, "blowup-reaction");
  }

  if (q > 1.0) {
    const auto mm = integrate_improper(kl, Weight::linear(), 0.0, policy);
    v.conditions.push_back(integral_record("memory_moment", mm));
    if (mm.diverges()) {
      const bool bound = decays_at_least(kl, 2.0, options.t_large);
      const bool mono = weighted_nonincreasing(kl, 1.0 - q, options.t_large);
      v.conditions.push_back(flag_record("memory_decay_bound", bound, "k_lower(t) <= C/t^2 for large t"));
      v.conditions.push_back(flag_record("memory_monotone", mono, "t^{1-q} k_lower(t) nonincreasing for large t"));
      if (bound || mono) return finish(Regime::BlowUpAll, "blowup-memory");
    }
  }

  const bool linear_reaction = p == 1.0 && q > 1.0;
  if (linear_reaction) {
    const auto lb = check_linear_reaction_blowup(q, c, kl, options.t_large, policy);
    v.conditions.push_back(integral_record("weighted_memory_moment", lb.weighted_moment));
    v.conditions.push_back(flag_record("weighted_memory_bound", lb.weighted_bound,
                                       "t^{1-q} e^{-2C} (int e^C)^{q+1} k_lower bounded for large t"));
    v.conditions.push_back(flag_record("weighted_memory_monotone", lb.weighted_monotone,
                                       "t^{1-q} e^{-2C} k_lower nonincreasing for large t"));
    if (lb.weighted_moment.diverges() && (lb.weighted_bound || lb.weighted_monotone)) {
      return finish(Regime::BlowUpAll, "blowup-linear-reaction");
    }
  }

  if (std::min(p, q) > 1.0) {
    const auto& ci = reaction_integral();
    const auto km = integrate_improper(k, Weight::linear(), 0.0, policy);
    IntegralVerdict moment;
    if (ci.converges() && km.converges()) {
      moment = {IntegralStatus::Converges, ci.value + km.value, "int c: " + ci.evidence + "; int t k: " + km.evidence};
    } else if (ci.diverges() || km.diverges()) {
      moment = {IntegralStatus::Diverges, kInf, "int c: " + ci.evidence + "; int t k: " + km.evidence};
    } else {
      moment = {IntegralStatus::Indeterminate, 0.0, "int c: " + ci.evidence + "; int t k: " + km.evidence};
    }
    v.conditions.push_back(integral_record("coefficient_moment", moment));
    if (moment.converges()) {
      const auto w = check_memory_window(k, options.window_t0, options.window_alpha, options.window_probe);
      v.conditions.push_back(flag_record("memory_window", w.holds, "sup of window integral " + fmt(w.sup)));
      if (w.holds) return finish(Regime::BoundedGlobalSmallData, "small-data-bounded");
    }
  }

  if (linear_reaction) {
    const auto lg = check_linear_reaction_global(q, c, k, options.window_t0, options.window_alpha,
                                                 options.window_probe, policy);
    v.conditions.push_back(integral_record("weighted_flux_moment", lg.weighted_flux_moment));
    if (lg.weighted_flux_moment.converges()) {
      v.conditions.push_back(flag_record("weighted_flux_window", lg.weighted_flux_window.holds,
                                         "sup of weighted window integral " + fmt(lg.weighted_flux_window.sup)));
      if (lg.weighted_flux_window.holds) {
        v.conditions.push_back(integral_record("reaction_integral_finite", lg.reaction_integral));
        return finish(lg.reaction_integral.converges() ? Regime::BoundedGlobalSmallData : Regime::GlobalSmallData,
                      "small-data-linear-reaction");
      }
    }
  }

  v.conditions.push_back(flag_record("coverage", false,
                                     "no covered result has all hypotheses certified for p=" + fmt(p) +
                                         ", q=" + fmt(q)));
  return finish(Regime::Indeterminate, "none");
}

}  // namespace memheat
