#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memheat/coeffs.hpp"
#include "memheat/pde.hpp"

namespace memheat {

/// Override lists for `sweep`; an empty list keeps the base scenario's value.
struct SweepGrid {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<CoefficientSpec> c;
  std::vector<CoefficientSpec> k;
  std::vector<double> initial_value;
};

struct OracleConfig {
  CoefficientSpec b = CoefficientSpec::constant(1.0);
  double q = 2.0;
  double a = 0.0;
  double y_a = 1.0;
  double yp_a = 1.0;
  double r_max = 1e6;
  double t_large = 1e3;
};

/// A parsed scenario document.
///
/// Required keys: exponents {p, q}, c, k, initial {family, value | nodes}.
/// Optional keys and defaults:
///   domain {length = 1, nodes = 201}
///   solver {t_max = 1, blowup_threshold = 1e10, theta = 0.1, dt_max = 1e-3, dt_init = theta h^2,
///           max_steps = 5e7}
///   output {dir = "memheat_out", snapshot_every = t_max / 100}
///   k_lower (coefficient), sweep {p, q, c, k, initial_value}, oracle {b, q, a, y_a, yp_a, r_max, t_large}
/// Coefficients: {family, amplitude = 1, gamma = 0, lambda = 0, log_depth = 0, log_power = 0, table}.
struct RunConfig {
  Scenario scenario;
  std::string output_dir = "memheat_out";
  std::optional<CoefficientSpec> k_lower;
  SweepGrid sweep;
  std::optional<OracleConfig> oracle;
};

/// Throws ConfigError naming the offending key or invariant.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// JSON document with every default spelled out; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

std::string format_number(double v);

}  // namespace memheat
