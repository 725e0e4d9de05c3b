#pragma once

// Sampled "for large values of t" checks shared by the coefficient, criteria and oracle modules.

#include <functional>
#include <vector>

namespace memheat::detail {

/// Log-spaced samples in [from, to], `per_decade` points per decade, endpoints included.
std::vector<double> log_samples(double from, double to, int per_decade = 20);

/// exp(log_f) stays bounded on [from, to]: either the least-squares slope of log f against log t
/// over the final decade is below `slope_tol`, or the final decade never exceeds the earlier maximum.
bool sampled_bounded(const std::function<double(double)>& log_f, double from, double to,
                     double slope_tol = 1e-2);

/// exp(log_f) never increases between consecutive samples on [from, to].
bool sampled_nonincreasing(const std::function<double(double)>& log_f, double from, double to);

}  // namespace memheat::detail
