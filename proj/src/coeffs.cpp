#include "memheat/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "memheat/errors.hpp"
#include "sampling.hpp"

namespace memheat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExponentTol = 1e-12;

bool same_exponent(double a, double b) { return std::abs(a - b) <= kExponentTol * std::max(1.0, std::abs(a)); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double gauss20(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

double log_or_neg_inf(double v) { return v > 0.0 ? std::log(v) : -kInf; }

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Integral of exp(log_f) over [a, b]; returned in log form.
double log_panel_integral(const std::function<double(double)>& log_f, double a, double b) {
  const double mid = 0.5 * (a + b);
  double shift = std::max({log_f(a), log_f(mid), log_f(b)});
  if (shift == -kInf) {
    // Probe a few interior points before declaring the panel empty.
    for (int i = 1; i < 8; ++i) shift = std::max(shift, log_f(a + (b - a) * i / 8.0));
    if (shift == -kInf) return -kInf;
  }
  if (std::isinf(shift)) return kInf;
  auto scaled = [&](double t) {
    const double v = log_f(t);
    return v == -kInf ? 0.0 : std::exp(v - shift);
  };
  const double r = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(scaled, a, b, 10, 1e-10);
  if (!(r > 0.0)) return -kInf;
  return shift + std::log(r);
}

// Tail estimate of \int_X^\infty t^m f(t) dt from the leading asymptotics of a convergent family.
double asymptotic_tail(const CoefficientSpec& s, double m, double x) {
  const double a = s.amplitude;
  switch (s.family) {
    case Family::Power:
      return a * std::pow(1.0 + x, m + 1.0 - s.gamma) / (s.gamma - m - 1.0);
    case Family::PowerLog: {
      const double sx = log_tower(s.log_depth) + x;
      if (s.log_depth == 0) {
        const double e = s.gamma + s.log_power;
        return a * std::pow(sx, m + 1.0 - e) / (e - m - 1.0);
      }
      if (same_exponent(s.gamma - m, 1.0)) {
        return a * std::pow(iterated_log(s.log_depth, sx), -s.log_power) / s.log_power;
      }
      return a * std::pow(sx, m + 1.0 - s.gamma) /
             ((s.gamma - m - 1.0) * log_product(s.log_depth, s.log_power, sx));
    }
    default:
      return 0.0;
  }
}

IntegralVerdict closed_form_verdict(const CoefficientSpec& s, double m, double t_lower,
                                    const QuadraturePolicy& policy) {
  IntegralVerdict v;
  const double a = s.amplitude;
  const std::string w = "weight t^" + fmt(m);
  auto numeric_value = [&](double tail_from_asymptotics) {
    QuadraturePolicy p = policy;
    p.force_numeric = true;
    const auto log_f = [&](double t) { return m * log_or_neg_inf(t) + log_or_neg_inf(eval_coeff(s, t)); };
    const auto nv = integrate_improper_numeric(
        [&](double t) { return (m == 0.0 || t > 0.0) ? log_f(t) : -kInf; }, t_lower, p);
    return nv.value + tail_from_asymptotics;
  };
  switch (s.family) {
    case Family::Constant:
      v.status = IntegralStatus::Diverges;
      v.evidence = "closed form: constant " + fmt(a) + " > 0 with " + w;
      return v;
    case Family::Power: {
      const double e = s.gamma - m;
      if (e < 1.0 || same_exponent(e, 1.0)) {
        v.status = IntegralStatus::Diverges;
        v.evidence = "closed form: power decay " + fmt(s.gamma) + " <= " + fmt(m + 1.0) + " with " + w;
        return v;
      }
      v.status = IntegralStatus::Converges;
      const double b = 1.0 + t_lower;
      if (m == 0.0) {
        v.value = a * std::pow(b, 1.0 - s.gamma) / (s.gamma - 1.0);
      } else if (m == 1.0) {
        v.value = a * (std::pow(b, 2.0 - s.gamma) / (s.gamma - 2.0) - std::pow(b, 1.0 - s.gamma) / (s.gamma - 1.0));
      } else {
        v.value = numeric_value(asymptotic_tail(s, m, policy.t_max));
      }
      v.evidence = "closed form: power decay " + fmt(s.gamma) + " > " + fmt(m + 1.0) + " with " + w;
      return v;
    }
    case Family::ExpDecay: {
      if (s.lambda <= 0.0) {
        v.status = IntegralStatus::Diverges;
        v.evidence = "closed form: exp_decay with zero rate is a positive constant, " + w;
        return v;
      }
      v.status = IntegralStatus::Converges;
      const double l = s.lambda;
      if (m == 0.0) {
        v.value = a * std::exp(-l * t_lower) / l;
      } else if (m == 1.0) {
        v.value = a * std::exp(-l * t_lower) * (t_lower / l + 1.0 / (l * l));
      } else {
        v.value = numeric_value(0.0);
      }
      v.evidence = "closed form: exponential decay rate " + fmt(l) + " > 0 beats " + w;
      return v;
    }
    case Family::PowerLog: {
      double e = s.gamma - m;
      if (s.log_depth == 0) e += s.log_power;
      const std::string shape = "power_log(gamma=" + fmt(s.gamma) + ", j=" + std::to_string(s.log_depth) +
                                ", delta=" + fmt(s.log_power) + ") with " + w;
      if (same_exponent(e, 1.0)) {
        // u = ln_j s turns the tail into \int du / u^{1+delta}; at depth 0 delta is already in e.
        if (s.log_depth > 0 && s.log_power > 0.0) {
          v.status = IntegralStatus::Converges;
          v.value = numeric_value(asymptotic_tail(s, m, policy.t_max));
          v.evidence = "closed form: borderline tail 1/(s l_j ln_j^delta) with delta > 0 converges, " + shape;
          return v;
        }
        v.status = IntegralStatus::Diverges;
        v.evidence = s.log_depth == 0 ? "closed form: harmonic tail 1/s, " + shape
                                      : "closed form: borderline tail 1/(s l_j) diverges like ln_{j+1}, " + shape;
        return v;
      }
      if (e < 1.0) {
        v.status = IntegralStatus::Diverges;
        v.evidence = "closed form: net decay exponent " + fmt(e) + " < 1, " + shape;
        return v;
      }
      v.status = IntegralStatus::Converges;
      v.value = numeric_value(asymptotic_tail(s, m, policy.t_max));
      v.evidence = "closed form: net decay exponent " + fmt(e) + " > 1, " + shape;
      return v;
    }
    case Family::Tabulated:
      break;
  }
  return v;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::Constant: return "constant";
    case Family::Power: return "power";
    case Family::ExpDecay: return "exp_decay";
    case Family::PowerLog: return "power_log";
    case Family::Tabulated: return "tabulated";
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  if (name == "constant") return Family::Constant;
  if (name == "power") return Family::Power;
  if (name == "exp_decay") return Family::ExpDecay;
  if (name == "power_log") return Family::PowerLog;
  if (name == "tabulated") return Family::Tabulated;
  throw ConfigError("unknown coefficient family '" + name + "'");
}

std::string to_string(IntegralStatus s) {
  switch (s) {
    case IntegralStatus::Converges: return "Converges";
    case IntegralStatus::Diverges: return "Diverges";
    case IntegralStatus::Indeterminate: return "Indeterminate";
  }
  return "?";
}

CoefficientSpec CoefficientSpec::constant(double amplitude) {
  CoefficientSpec s;
  s.family = Family::Constant;
  s.amplitude = amplitude;
  return s;
}

CoefficientSpec CoefficientSpec::power(double amplitude, double gamma) {
  CoefficientSpec s;
  s.family = Family::Power;
  s.amplitude = amplitude;
  s.gamma = gamma;
  return s;
}

CoefficientSpec CoefficientSpec::exp_decay(double amplitude, double lambda) {
  CoefficientSpec s;
  s.family = Family::ExpDecay;
  s.amplitude = amplitude;
  s.lambda = lambda;
  return s;
}

CoefficientSpec CoefficientSpec::power_log(double amplitude, double gamma, int log_depth, double log_power) {
  CoefficientSpec s;
  s.family = Family::PowerLog;
  s.amplitude = amplitude;
  s.gamma = gamma;
  s.log_depth = log_depth;
  s.log_power = log_power;
  return s;
}

CoefficientSpec CoefficientSpec::tabulated(std::vector<std::pair<double, double>> table) {
  CoefficientSpec s;
  s.family = Family::Tabulated;
  s.table = std::move(table);
  return s;
}

void CoefficientSpec::validate() const {
  if (family == Family::Tabulated) {
    if (table.empty()) throw ConfigError("tabulated coefficient needs a nonempty table");
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (!std::isfinite(table[i].first) || !std::isfinite(table[i].second))
        throw ConfigError("tabulated coefficient has a non-finite entry");
      if (table[i].second < 0.0) throw ConfigError("tabulated coefficient values must be >= 0");
      if (i > 0 && !(table[i].first > table[i - 1].first))
        throw ConfigError("tabulated coefficient times must be strictly increasing");
    }
    return;
  }
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ConfigError("coefficient amplitude must be >= 0");
  if (!std::isfinite(gamma)) throw ConfigError("coefficient gamma must be finite");
  if (!(lambda >= 0.0)) throw ConfigError("coefficient lambda must be >= 0");
  if (family == Family::PowerLog) {
    if (log_depth < 0 || log_depth > 3) throw ConfigError("power_log log_depth must be in [0, 3]");
    if (!(log_power >= 0.0)) throw ConfigError("power_log log_power must be >= 0");
  }
}

bool CoefficientSpec::is_zero() const {
  if (family == Family::Tabulated) {
    return std::all_of(table.begin(), table.end(), [](const auto& e) { return e.second == 0.0; });
  }
  return amplitude == 0.0;
}

double CoefficientSpec::tail_value() const {
  if (family != Family::Tabulated || table.empty()) return 0.0;
  return table.back().second;
}

double log_tower(int j) {
  double t = 1.0;
  for (int i = 0; i < j; ++i) t = std::exp(t);
  return t;
}

double iterated_log(int j, double t) {
  if (j < 0) throw DomainError("iterated logarithm depth must be >= 0");
  double v = t;
  for (int i = 0; i < j; ++i) {
    if (i == j - 1 && !(v > 1.0)) {
      throw DomainError("ln_" + std::to_string(j) + " requires t > T_" + std::to_string(j - 1) + ", got t = " + fmt(t));
    }
    if (!(v > 0.0)) {
      throw DomainError("ln_" + std::to_string(j) + " undefined at t = " + fmt(t));
    }
    v = std::log(v);
  }
  return v;
}

double log_product(int j, double t) {
  double prod = 1.0;
  for (int i = 1; i <= j; ++i) prod *= iterated_log(i, t);
  return prod;
}

double log_product(int j, double gamma, double t) {
  return log_product(j, t) * std::pow(iterated_log(j, t), gamma);
}

double eval_coeff(const CoefficientSpec& spec, double t) {
  if (t < 0.0) throw DomainError("coefficient evaluated at negative time");
  const double a = spec.amplitude;
  switch (spec.family) {
    case Family::Constant:
      return a;
    case Family::Power:
      return a * std::pow(1.0 + t, -spec.gamma);
    case Family::ExpDecay:
      return a * std::exp(-spec.lambda * t);
    case Family::PowerLog: {
      if (a == 0.0) return 0.0;
      const double s = log_tower(spec.log_depth) + t;
      const double logs = std::pow(iterated_log(spec.log_depth, s), spec.log_power) * log_product(spec.log_depth, s);
      return a / (std::pow(s, spec.gamma) * logs);
    }
    case Family::Tabulated: {
      const auto& tab = spec.table;
      if (tab.empty()) throw ConfigError("tabulated coefficient needs a nonempty table");
      if (t <= tab.front().first) return tab.front().second;
      if (t >= tab.back().first) return tab.back().second;
      const auto it = std::upper_bound(tab.begin(), tab.end(), t,
                                       [](double x, const auto& e) { return x < e.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (t - lo.first) / (hi.first - lo.first);
      return lo.second + w * (hi.second - lo.second);
    }
  }
  return 0.0;
}

double integrate_finite(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  // Geometric panels keep long intervals well resolved near their left end.
  double total = 0.0;
  double lo = a;
  double width = std::min(1.0, b - a);
  while (lo < b) {
    const double hi = std::min(b, lo + width);
    total += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, 10, 1e-12);
    lo = hi;
    width *= 2.0;
  }
  return total;
}

IntegralVerdict integrate_improper_numeric(const std::function<double(double)>& log_integrand, double t_lower,
                                           const QuadraturePolicy& policy) {
  IntegralVerdict v;
  const double x0 = t_lower + 1.0;
  double log_sum = -kInf;
  for (int i = 0; i < 4; ++i) {
    const double a = t_lower + i * 0.25;
    log_sum = log_add(log_sum, log_panel_integral(log_integrand, a, a + 0.25));
  }
  std::vector<double> log_incr;
  double lo = x0;
  while (lo < policy.t_max) {
    const double hi = lo * 10.0;
    double li = -kInf;
    for (int i = 0; i < 8; ++i) {
      const double a = lo * std::pow(10.0, i / 8.0);
      const double b = lo * std::pow(10.0, (i + 1) / 8.0);
      li = log_add(li, log_panel_integral(log_integrand, a, b));
    }
    log_incr.push_back(li);
    log_sum = log_add(log_sum, li);
    lo = hi;
  }
  std::ostringstream ev;
  ev << "numeric: " << log_incr.size() << " decades to t=" << fmt(lo);
  if (log_sum == -kInf) {
    v.status = IntegralStatus::Converges;
    v.value = 0.0;
    v.evidence = ev.str() + ", integrand vanishes";
    return v;
  }
  if (std::isinf(log_sum) || std::isnan(log_sum)) {
    v.status = IntegralStatus::Diverges;
    v.value = kInf;
    v.evidence = ev.str() + ", partial sums overflow";
    return v;
  }
  const std::size_t n = log_incr.size();
  if (n < 4) {
    v.status = IntegralStatus::Indeterminate;
    v.value = std::exp(log_sum);
    v.evidence = ev.str() + ", too few decades to decide";
    return v;
  }
  const double last = log_incr.back();
  double max_ratio = -kInf;
  double min_ratio = kInf;
  for (std::size_t i = n - 3; i < n; ++i) {
    double r;
    if (log_incr[i] == -kInf) {
      r = -kInf;
    } else if (log_incr[i - 1] == -kInf) {
      r = kInf;
    } else {
      r = log_incr[i] - log_incr[i - 1];
    }
    max_ratio = std::max(max_ratio, r);
    min_ratio = std::min(min_ratio, r);
  }
  const double rel_last = last == -kInf ? 0.0 : std::exp(last - log_sum);
  const double rmax = std::exp(max_ratio);
  ev << ", last decade share " << fmt(rel_last) << ", decade ratios in [" << fmt(std::exp(min_ratio)) << ", "
     << fmt(rmax) << "]";
  const double partial = std::exp(log_sum);
  if (rel_last <= policy.flat_tolerance || rmax <= 0.75) {
    const double tail = rmax < 1.0 && last != -kInf ? std::exp(last) * rmax / (1.0 - rmax) : 0.0;
    if (tail <= 1e-2 * partial || rel_last <= policy.flat_tolerance) {
      v.status = IntegralStatus::Converges;
      v.value = partial + tail;
      v.evidence = ev.str() + ", flattened with geometric tail bound " + fmt(tail);
      return v;
    }
  }
  if (std::exp(min_ratio) >= 0.95) {
    v.status = IntegralStatus::Diverges;
    v.value = partial;
    v.evidence = ev.str() + ", partial sums keep growing";
    return v;
  }
  v.status = IntegralStatus::Indeterminate;
  v.value = partial;
  v.evidence = ev.str() + ", neither flattening nor steady growth";
  return v;
}

IntegralVerdict integrate_improper(const CoefficientSpec& spec, Weight weight, double t_lower,
                                   const QuadraturePolicy& policy) {
  spec.validate();
  if (weight.exponent < 0.0) throw ConfigError("improper-integral weight exponent must be >= 0");
  if (t_lower < 0.0) throw ConfigError("improper-integral lower limit must be >= 0");
  if (spec.is_zero()) {
    return {IntegralStatus::Converges, 0.0, "closed form: coefficient vanishes identically"};
  }
  if (!policy.force_numeric && spec.family != Family::Tabulated) {
    return closed_form_verdict(spec, weight.exponent, t_lower, policy);
  }
  const double m = weight.exponent;
  return integrate_improper_numeric(
      [&](double t) {
        const double w = m == 0.0 ? 0.0 : (t > 0.0 ? m * std::log(t) : -kInf);
        return w + log_or_neg_inf(eval_coeff(spec, t));
      },
      t_lower, policy);
}

WindowBound window_supremum(const std::function<double(double)>& flux, double t0, double alpha, double t_probe) {
  if (!(t0 > 0.0) || !(alpha > t0)) throw ConfigError("memory window needs alpha > t0 > 0");
  if (!(t_probe >= 100.0 * alpha)) throw ConfigError("memory window probe range must span two decades");
  const double root = std::sqrt(t0);
  auto window = [&](double t) {
    auto g = [&](double s) { return flux(t - s * s); };
    double prev = 0.0;
    for (int panels = 1; panels <= 1024; panels *= 2) {
      double acc = 0.0;
      for (int i = 0; i < panels; ++i) acc += gauss20(g, root * i / panels, root * (i + 1) / panels);
      acc *= 2.0;
      if (panels > 1 && std::abs(acc - prev) <= 1e-12 * std::max(1.0, std::abs(acc))) return acc;
      prev = acc;
    }
    return prev;
  };
  WindowBound out;
  double earlier = 0.0;
  double overall = 0.0;
  for (double t : detail::log_samples(alpha, t_probe, 10)) {
    const double j = window(t);
    overall = std::max(overall, j);
    if (t < t_probe / 10.0) earlier = std::max(earlier, j);
  }
  out.sup = overall;
  out.holds = overall == 0.0 || (overall - earlier) <= 1e-3 * overall;
  return out;
}

WindowBound check_memory_window(const CoefficientSpec& k, double t0, double alpha, double t_probe) {
  k.validate();
  return window_supremum([&](double tau) { return tau * eval_coeff(k, tau); }, t0, alpha, t_probe);
}

bool decays_at_least(const CoefficientSpec& s, double exponent, double t_large) {
  s.validate();
  if (s.is_zero()) return true;
  switch (s.family) {
    case Family::Constant:
      return exponent <= 0.0;
    case Family::Power:
      return s.gamma >= exponent - kExponentTol;
    case Family::ExpDecay:
      return s.lambda > 0.0 || exponent <= 0.0;
    case Family::PowerLog:
      if (s.log_depth == 0) return s.gamma + s.log_power >= exponent - kExponentTol;
      return s.gamma >= exponent - kExponentTol;
    case Family::Tabulated: {
      const double t_end = std::max(t_large, s.table.back().first) * 10.0;
      return detail::sampled_bounded(
          [&](double t) { return exponent * std::log(t) + log_or_neg_inf(eval_coeff(s, t)); }, t_large, t_end);
    }
  }
  return false;
}

bool weighted_nonincreasing(const CoefficientSpec& s, double power, double t_large) {
  s.validate();
  if (s.is_zero()) return true;
  const double m = power;
  switch (s.family) {
    case Family::Constant:
      return m <= 0.0;
    case Family::Power:
      return m < s.gamma - kExponentTol || (same_exponent(m, s.gamma) && m <= 0.0);
    case Family::ExpDecay:
      return s.lambda > 0.0 || m <= 0.0;
    case Family::PowerLog: {
      if (s.log_depth == 0) {
        const double g = s.gamma + s.log_power;
        return m < g - kExponentTol || (same_exponent(m, g) && m <= 0.0);
      }
      return m <= s.gamma + kExponentTol;
    }
    case Family::Tabulated: {
      const double t_end = std::max(t_large, s.table.back().first) * 10.0;
      return detail::sampled_nonincreasing(
          [&](double t) { return m * std::log(t) + log_or_neg_inf(eval_coeff(s, t)); }, t_large, t_end);
    }
  }
  return false;
}

Primitive::Primitive(CoefficientSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.family == Family::PowerLog && spec_.amplitude != 0.0 && spec_.log_depth > 0 &&
      !same_exponent(spec_.gamma, 1.0)) {
    closed_form_ = false;
    nodes_.push_back(0.0);
    cumulative_.push_back(0.0);
    const auto f = [this](double t) { return eval_coeff(spec_, t); };
    for (int i = 1; nodes_.back() < 1e12; ++i) {
      const double t = std::expm1(0.05 * i);
      cumulative_.push_back(cumulative_.back() + gauss20(f, nodes_.back(), t));
      nodes_.push_back(t);
    }
  }
}

double Primitive::numeric_value(double t) const {
  const auto f = [this](double x) { return eval_coeff(spec_, x); };
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (i + 1 >= nodes_.size()) return cumulative_.back() + integrate_finite(f, nodes_.back(), t);
  return cumulative_[i] + gauss20(f, nodes_[i], t);
}

double Primitive::value(double t) const {
  if (t <= 0.0) return 0.0;
  const CoefficientSpec& s = spec_;
  const double a = s.amplitude;
  if (s.is_zero()) return 0.0;
  switch (s.family) {
    case Family::Constant:
      return a * t;
    case Family::Power:
      if (same_exponent(s.gamma, 1.0)) return a * std::log1p(t);
      return a * std::expm1((1.0 - s.gamma) * std::log1p(t)) / (1.0 - s.gamma);
    case Family::ExpDecay:
      if (s.lambda == 0.0) return a * t;
      return -a * std::expm1(-s.lambda * t) / s.lambda;
    case Family::PowerLog: {
      if (s.log_depth == 0) {
        const double g = s.gamma + s.log_power;
        if (same_exponent(g, 1.0)) return a * std::log1p(t);
        return a * std::expm1((1.0 - g) * std::log1p(t)) / (1.0 - g);
      }
      if (!closed_form_) return numeric_value(t);
      const double u = iterated_log(s.log_depth, log_tower(s.log_depth) + t);
      if (s.log_power == 0.0) return a * std::log(u);
      return a * (1.0 - std::pow(u, -s.log_power)) / s.log_power;
    }
    case Family::Tabulated: {
      const auto& tab = s.table;
      double acc = 0.0;
      double prev_t = 0.0;
      double prev_v = eval_coeff(s, 0.0);
      for (const auto& [tn, vn] : tab) {
        if (tn <= 0.0) continue;
        if (tn >= t) break;
        acc += 0.5 * (prev_v + vn) * (tn - prev_t);
        prev_t = tn;
        prev_v = vn;
      }
      acc += 0.5 * (prev_v + eval_coeff(s, t)) * (t - prev_t);
      return acc;
    }
  }
  return 0.0;
}

double Primitive::total() const {
  const CoefficientSpec& s = spec_;
  if (s.is_zero()) return 0.0;
  const double a = s.amplitude;
  switch (s.family) {
    case Family::Constant:
      return kInf;
    case Family::Power:
      return s.gamma > 1.0 && !same_exponent(s.gamma, 1.0) ? a / (s.gamma - 1.0) : kInf;
    case Family::ExpDecay:
      return s.lambda > 0.0 ? a / s.lambda : kInf;
    case Family::PowerLog: {
      if (s.log_depth == 0) {
        const double g = s.gamma + s.log_power;
        return g > 1.0 && !same_exponent(g, 1.0) ? a / (g - 1.0) : kInf;
      }
      if (closed_form_) return s.log_power > 0.0 ? a / s.log_power : kInf;
      if (s.gamma < 1.0) return kInf;
      return cumulative_.back() + asymptotic_tail(s, 0.0, nodes_.back());
    }
    case Family::Tabulated:
      if (s.tail_value() > 0.0) return kInf;
      return value(std::max(0.0, s.table.back().first));
  }
  return kInf;
}

double Primitive::log_exp_moment(double s_factor, double t) const {
  if (t <= 0.0) return -kInf;
  const CoefficientSpec& s = spec_;
  if (s.is_zero() || s_factor == 0.0) return std::log(t);
  const double a = s.amplitude;
  const bool constant_rate =
      s.family == Family::Constant || (s.family == Family::ExpDecay && s.lambda == 0.0);
  if (constant_rate) {
    const double rate = s_factor * a;
    const double x = rate * t;
    return x + std::log(-std::expm1(-x)) - std::log(rate);
  }
  if (s.family == Family::Power && same_exponent(s.gamma, 1.0)) {
    const double e = s_factor * a + 1.0;
    const double x = e * std::log1p(t);
    return x + std::log(-std::expm1(-x)) - std::log(e);
  }
  // log \int_a^t exp(s C(tau)) dtau, shifted by s C(t) so nothing overflows
  const auto tail = [&](double a, double t) {
    const double ct = value(t);
    const auto g = [&](double sigma) { return std::exp(s_factor * (value(t - sigma) - ct)); };
    double acc = 0.0;
    double lo = 0.0;
    double width = std::min(1.0, t - a);
    while (lo < t - a) {
      const double hi = std::min(t - a, lo + width);
      acc += gauss20(g, lo, hi);
      lo = hi;
      width *= 2.0;
    }
    return s_factor * ct + std::log(acc);
  };
  const auto& table = moment_table(s_factor);
  const auto& nodes = moments_->nodes;
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
  if (nodes[i] == t) return table[i];
  const double head = table[i];
  const double rest = tail(nodes[i], t);
  if (head == -kInf) return rest;
  const double hi = std::max(head, rest);
  return hi + std::log1p(std::exp(std::min(head, rest) - hi));
}

const std::vector<double>& Primitive::moment_table(double s_factor) const {
  std::lock_guard<std::mutex> guard(moments_->lock);
  auto& nodes = moments_->nodes;
  if (nodes.empty()) {
    for (int i = 0; nodes.empty() || nodes.back() < 1e12; ++i) nodes.push_back(std::expm1(0.05 * i));
  }
  auto [pos, fresh] = moments_->log_moments.try_emplace(s_factor);
  if (!fresh) return pos->second;
  auto& table = pos->second;
  table.reserve(nodes.size());
  table.push_back(-kInf);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double a = nodes[i - 1], b = nodes[i];
    const double cb = value(b);
    const double piece =
        s_factor * cb + std::log(gauss20([&](double x) { return std::exp(s_factor * (value(x) - cb)); }, a, b));
    const double prev = table.back();
    if (prev == -kInf) {
      table.push_back(piece);
    } else {
      const double hi = std::max(prev, piece);
      table.push_back(hi + std::log1p(std::exp(std::min(prev, piece) - hi)));
    }
  }
  return table;
}

}  // namespace memheat
