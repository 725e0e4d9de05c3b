#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace memheat {

enum class Family { Constant, Power, ExpDecay, PowerLog, Tabulated };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

/// Nonnegative continuous coefficient of time.
///
///   constant   f(t) = a
///   power      f(t) = a (1+t)^-gamma
///   exp_decay  f(t) = a exp(-lambda t)
///   power_log  f(t) = a / ((T_j+t)^gamma l_j(T_j+t) ln_j(T_j+t)^log_power)
///   tabulated  piecewise linear through `table`, constant outside it
///
/// T_j is the exponential tower of height j (T_0 = 1, T_1 = e, T_2 = e^e, ...), so every
/// iterated logarithm in the power_log family is >= 1 from t = 0 on.
struct CoefficientSpec {
  Family family = Family::Constant;
  double amplitude = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  int log_depth = 0;
  double log_power = 0.0;
  std::vector<std::pair<double, double>> table;

  static CoefficientSpec constant(double amplitude);
  static CoefficientSpec power(double amplitude, double gamma);
  static CoefficientSpec exp_decay(double amplitude, double lambda);
  static CoefficientSpec power_log(double amplitude, double gamma, int log_depth, double log_power);
  static CoefficientSpec tabulated(std::vector<std::pair<double, double>> table);

  /// Throws ConfigError when a field violates the family's invariants.
  void validate() const;

  /// True when the function vanishes for every t >= 0.
  bool is_zero() const;

  /// Value used for t beyond the table (tabulated only).
  double tail_value() const;
};

double eval_coeff(const CoefficientSpec& spec, double t);

/// T_j: 1, e, e^e, ...
double log_tower(int j);

/// ln_j t, with ln_0 t = t. Throws DomainError unless t > T_{j-1}.
double iterated_log(int j, double t);

/// l_j(t) = ln_1 t * ... * ln_j t (empty product for j = 0).
double log_product(int j, double t);

/// l_{j,gamma}(t) = l_j(t) ln_j(t)^gamma.
double log_product(int j, double gamma, double t);

enum class IntegralStatus { Converges, Diverges, Indeterminate };

std::string to_string(IntegralStatus s);

struct IntegralVerdict {
  IntegralStatus status = IntegralStatus::Indeterminate;
  double value = 0.0;  // meaningful when status == Converges
  std::string evidence;

  bool converges() const { return status == IntegralStatus::Converges; }
  bool diverges() const { return status == IntegralStatus::Diverges; }
};

/// Multiplier applied to the coefficient inside an improper integral: t^exponent (exponent >= 0).
struct Weight {
  double exponent = 0.0;

  static Weight unit() { return {0.0}; }
  static Weight linear() { return {1.0}; }
  static Weight power(double m) { return {m}; }
};

struct QuadraturePolicy {
  double t_max = 1e9;
  double flat_tolerance = 1e-6;  // relative increment per decade that counts as flat
  bool force_numeric = false;    // skip closed-form family rules
};

/// Convergence verdict for \int_{t_lower}^\infty t^m f(t) dt.
IntegralVerdict integrate_improper(const CoefficientSpec& spec, Weight weight, double t_lower = 0.0,
                                   const QuadraturePolicy& policy = {});

/// Numerical decision for \int_{t_lower}^\infty exp(log_integrand(t)) dt over decades up to
/// policy.t_max. The integrand is supplied in log form so exponential weights cannot overflow;
/// -inf marks a zero value.
IntegralVerdict integrate_improper_numeric(const std::function<double(double)>& log_integrand,
                                           double t_lower, const QuadraturePolicy& policy = {});

/// \int_a^b f(t) dt by adaptive Gauss-Kronrod on geometric panels.
double integrate_finite(const std::function<double(double)>& f, double a, double b);

struct WindowBound {
  double sup = 0.0;   // largest probed window integral
  bool holds = false; // running maximum stabilized over the final probe decade
};

/// sup over t in [alpha, t_probe] of \int_{t-t0}^t flux(tau)/sqrt(t-tau) dtau, evaluated as
/// 2 \int_0^{sqrt t0} flux(t - s^2) ds (no endpoint singularity).
WindowBound window_supremum(const std::function<double(double)>& flux, double t0, double alpha,
                            double t_probe);

/// The memory window condition with flux tau k(tau).
WindowBound check_memory_window(const CoefficientSpec& k, double t0 = 1.0, double alpha = 2.0,
                                double t_probe = 1e6);

/// k(t) <= C/t^exponent for large t, decided per family or by sampling tabulated data
/// beyond t_large.
bool decays_at_least(const CoefficientSpec& spec, double exponent, double t_large = 1e3);

/// t^power f(t) is nonincreasing for large t.
bool weighted_nonincreasing(const CoefficientSpec& spec, double power, double t_large = 1e3);

/// Cumulative integral C(t) = \int_0^t f and the exponential moments
/// E_s(t) = \int_0^t exp(s C(tau)) dtau, in closed form where the family allows it and from a
/// precomputed panel table otherwise. E_s is tabulated on first use for each s; copies share the
/// table.
class Primitive {
 public:
  explicit Primitive(CoefficientSpec spec);

  const CoefficientSpec& spec() const { return spec_; }

  double value(double t) const;

  /// C(infinity); +inf when the integral diverges.
  double total() const;

  /// log E_s(t); -inf at t = 0.
  double log_exp_moment(double s, double t) const;

 private:
  double numeric_value(double t) const;
  const std::vector<double>& moment_table(double s) const;

  struct MomentCache {
    std::mutex lock;
    std::vector<double> nodes;
    std::map<double, std::vector<double>> log_moments;  // log E_s at the nodes, per s
  };

  CoefficientSpec spec_;
  std::shared_ptr<MomentCache> moments_ = std::make_shared<MomentCache>();
  bool closed_form_ = true;
  std::vector<double> nodes_;
  std::vector<double> cumulative_;
};

}  // namespace memheat
