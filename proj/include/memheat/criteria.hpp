#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memheat/coeffs.hpp"

namespace memheat {

enum class Regime { GlobalAll, BlowUpAll, GlobalSmallData, BoundedGlobalSmallData, Indeterminate };

std::string to_string(Regime r);

/// One hypothesis that was evaluated: either an improper-integral verdict or a flag.
struct ConditionRecord {
  std::string id;
  std::optional<IntegralVerdict> integral;
  std::optional<bool> flag;
  std::string evidence;

  /// Integral conditions certify when their status matches `want`; flags certify when true.
  bool certified(IntegralStatus want) const;
};

struct RegimeVerdict {
  Regime regime = Regime::Indeterminate;
  std::string rule;  // "sublinear-global", "blowup-reaction", ...
  std::vector<ConditionRecord> conditions;
  std::optional<double> small_data_bound;
  std::string note;
};

struct ClassifyOptions {
  std::optional<CoefficientSpec> k_lower;  // lower bound for k; defaults to k itself
  double t_large = 1e3;                    // onset of "large t" for the sampled alternatives
  double window_t0 = 1.0;
  double window_alpha = 2.0;
  double window_probe = 1e6;
  QuadraturePolicy policy{};
};

RegimeVerdict classify_regime(double p, double q, const CoefficientSpec& c, const CoefficientSpec& k,
                              const ClassifyOptions& options = {});

/// Hypotheses of the p = 1 blow-up result. `weighted_moment` is the divergence requirement,
/// `weighted_bound` and `weighted_monotone` the two "large t" alternatives.
struct LinearReactionBlowup {
  IntegralVerdict weighted_moment;
  bool weighted_bound = false;
  bool weighted_monotone = false;
};

LinearReactionBlowup check_linear_reaction_blowup(double q, const CoefficientSpec& c, const CoefficientSpec& k_lower,
                                                  double t_large = 1e3, const QuadraturePolicy& policy = {});

/// Hypotheses of the p = 1 small-data result. The window check runs on the effective flux
/// kappa(t) = k(t) e^{-C(t)} \int_0^t e^{q C}.
struct LinearReactionGlobal {
  IntegralVerdict weighted_flux_moment;
  WindowBound weighted_flux_window;
  IntegralVerdict reaction_integral;
};

LinearReactionGlobal check_linear_reaction_global(double q, const CoefficientSpec& c, const CoefficientSpec& k,
                                                  double t0 = 1.0, double alpha = 2.0, double t_probe = 1e6,
                                                  const QuadraturePolicy& policy = {});

/// kappa(t) = k(t) e^{-C(t)} \int_0^t e^{q C(tau)} dtau, the flux of the p = 1 auxiliary problem.
double effective_flux(double q, const Primitive& c, const CoefficientSpec& k, double t);

}  // namespace memheat
