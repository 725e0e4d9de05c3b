#include "sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace memheat::detail {

std::vector<double> log_samples(double from, double to, int per_decade) {
  std::vector<double> out;
  if (!(to > from) || from <= 0.0) {
    out.push_back(from);
    return out;
  }
  const double decades = std::log10(to / from);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(from * std::pow(to / from, static_cast<double>(i) / (n - 1)));
  }
  out.back() = to;
  return out;
}

bool sampled_bounded(const std::function<double(double)>& log_f, double from, double to,
                     double slope_tol) {
  const auto ts = log_samples(from, to);
  const double final_start = to / 10.0;
  double earlier_max = -std::numeric_limits<double>::infinity();
  double final_max = -std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  bool final_all_zero = true;
  for (double t : ts) {
    const double v = log_f(t);
    if (std::isnan(v)) return false;
    if (t < final_start) {
      earlier_max = std::max(earlier_max, v);
      continue;
    }
    final_max = std::max(final_max, v);
    if (std::isinf(v) && v < 0) continue;
    final_all_zero = false;
    const double x = std::log(t);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
    ++n;
  }
  if (final_all_zero) return true;
  if (std::isinf(final_max)) return false;
  if (final_max <= earlier_max + 1e-12 * std::max(1.0, std::abs(earlier_max))) return true;
  if (n < 2) return false;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return slope <= slope_tol;
}

bool sampled_nonincreasing(const std::function<double(double)>& log_f, double from, double to) {
  const auto ts = log_samples(from, to);
  double prev = log_f(ts.front());
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double v = log_f(ts[i]);
    if (std::isnan(v)) return false;
    if (std::isinf(prev) && prev < 0) {
      if (!(std::isinf(v) && v < 0)) return false;
      continue;
    }
    if (v > prev + 1e-12 * std::max(1.0, std::abs(prev))) return false;
    prev = v;
  }
  return true;
}

}  // namespace memheat::detail
