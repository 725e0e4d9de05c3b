#include "memheat/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "memheat/errors.hpp"

namespace memheat {

namespace {

double pos_pow(double u, double e) { return u > 0.0 ? std::pow(u, e) : 0.0; }

// Solves the tridiagonal system in place; `rhs` becomes the solution.
// sub[0] and super[n-1] are unused.
void solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                       const std::vector<double>& super, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n);
  double denom = diag[0];
  c[0] = super[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * c[i - 1];
    if (denom == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    c[i] = i + 1 < n ? super[i] / denom : 0.0;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

double scale_at(const ProblemModel& m, double t) { return m.output_scale ? m.output_scale(t) : 1.0; }

// The prescribed part is known data and is taken at `t_data`, the end of the step.
double boundary_flux(const ProblemModel& m, double t, double memory, double t_data) {
  double g = m.flux_factor ? m.flux_factor(t) * memory : 0.0;
  if (m.prescribed_flux) g += m.prescribed_flux(t_data);
  return g;
}

TracePoint make_trace(const State& st, const ProblemModel& m, double h, double dt) {
  const double sc = scale_at(m, st.t);
  return {st.t, sup_norm(st.u) * sc, trapezoid_mass(st.u, h) * sc, st.mem_left, st.mem_right, dt};
}

}  // namespace

std::string to_string(InitialFamily f) {
  switch (f) {
    case InitialFamily::Constant: return "constant";
    case InitialFamily::CosBump: return "cos_bump";
    case InitialFamily::Tabulated: return "tabulated";
  }
  return "?";
}

InitialFamily initial_family_from_string(const std::string& name) {
  if (name == "constant") return InitialFamily::Constant;
  if (name == "cos_bump") return InitialFamily::CosBump;
  if (name == "tabulated") return InitialFamily::Tabulated;
  throw ConfigError("unknown initial family '" + name + "'");
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::BlowUp: return "BlowUp";
    case RunStatus::GlobalToHorizon: return "GlobalToHorizon";
    case RunStatus::Aborted: return "Aborted";
  }
  return "?";
}

InitialSpec InitialSpec::constant(double value) { return {InitialFamily::Constant, value, {}}; }
InitialSpec InitialSpec::cos_bump(double amplitude) { return {InitialFamily::CosBump, amplitude, {}}; }
InitialSpec InitialSpec::tabulated(std::vector<double> nodes) {
  return {InitialFamily::Tabulated, 0.0, std::move(nodes)};
}

void InitialSpec::validate(double length, int node_count) const {
  if (family != InitialFamily::Tabulated) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("initial.value must be >= 0");
    return;
  }
  if (static_cast<int>(nodes.size()) != node_count) {
    throw ConfigError("tabulated initial data needs one value per grid node (" + std::to_string(node_count) + ")");
  }
  double amp = 0.0;
  for (double v : nodes) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("tabulated initial data must be finite and >= 0");
    amp = std::max(amp, v);
  }
  const double h = length / (node_count - 1);
  const std::size_t n = nodes.size();
  const double left = (-3.0 * nodes[0] + 4.0 * nodes[1] - nodes[2]) / (2.0 * h);
  const double right = (3.0 * nodes[n - 1] - 4.0 * nodes[n - 2] + nodes[n - 3]) / (2.0 * h);
  if (std::max(std::abs(left), std::abs(right)) > 1e-8 * amp) {
    throw ConfigError("tabulated initial data violates the zero endpoint slope invariant |u0'| <= 1e-8 max u0");
  }
}

std::vector<double> InitialSpec::sample(double length, int node_count) const {
  if (family == InitialFamily::Tabulated) return nodes;
  std::vector<double> u(node_count, value);
  if (family == InitialFamily::CosBump) {
    const double h = length / (node_count - 1);
    for (int i = 0; i < node_count; ++i) {
      u[i] = value * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i * h / length));
    }
    u.front() = 0.0;
    u.back() = 0.0;
  }
  return u;
}

void SolverControls::validate() const {
  if (nodes < 3) throw ConfigError("domain.nodes must be >= 3");
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("solver.theta must be in (0, 1]");
  if (!(dt_max > 0.0)) throw ConfigError("solver.dt_max must be > 0");
  if (!(dt_init >= 0.0)) throw ConfigError("solver.dt_init must be >= 0");
  if (!(blowup_threshold > 0.0)) throw ConfigError("solver.blowup_threshold must be > 0");
  if (!(t_max > 0.0)) throw ConfigError("solver.t_max must be > 0");
  if (!(snapshot_every >= 0.0)) throw ConfigError("output.snapshot_every must be >= 0");
  if (max_steps < 1) throw ConfigError("solver.max_steps must be >= 1");
}

void Scenario::validate() const {
  if (!(length > 0.0)) throw ConfigError("domain.length must be > 0");
  if (!(p > 0.0)) throw ConfigError("exponents.p must be > 0");
  if (!(q > 0.0)) throw ConfigError("exponents.q must be > 0");
  c.validate();
  k.validate();
  controls.validate();
  u0.validate(length, controls.nodes);
}

Scenario refined(Scenario s, int times) {
  for (int r = 0; r < times; ++r) {
    const int n = s.controls.nodes;
    if (s.u0.family == InitialFamily::Tabulated) {
      std::vector<double> fine(2 * n - 1);
      for (int i = 0; i < n; ++i) fine[2 * i] = s.u0.nodes[i];
      for (int i = 0; i + 1 < n; ++i) fine[2 * i + 1] = 0.5 * (s.u0.nodes[i] + s.u0.nodes[i + 1]);
      s.u0.nodes = std::move(fine);
    }
    s.controls.nodes = 2 * n - 1;
    s.controls.theta *= 0.5;
    s.controls.dt_max *= 0.5;
    s.controls.dt_init *= 0.25;
  }
  return s;
}

ProblemModel direct_model(const Scenario& s) {
  ProblemModel m;
  m.p = s.p;
  m.q = s.q;
  m.reaction = [c = s.c](double t) { return eval_coeff(c, t); };
  m.flux_factor = [k = s.k](double t) { return eval_coeff(k, t); };
  m.memory_weight = [](double) { return 1.0; };
  return m;
}

State initial_state(const Scenario& s) {
  State st;
  st.u = s.u0.sample(s.length, s.controls.nodes);
  return st;
}

double sup_norm(const std::vector<double>& u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

double trapezoid_mass(const std::vector<double>& u, double h) {
  if (u.size() < 2) return 0.0;
  double acc = 0.5 * (u.front() + u.back());
  for (std::size_t i = 1; i + 1 < u.size(); ++i) acc += u[i];
  return acc * h;
}

void step(State& st, const ProblemModel& m, double h, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step needs dt > 0");
  const std::size_t n = st.u.size();
  const double t = st.t;
  const double r = dt / (h * h);
  const double c = m.reaction ? m.reaction(t) : 0.0;
  const double gl = boundary_flux(m, t, st.mem_left, t + dt);
  const double gr = boundary_flux(m, t, st.mem_right, t + dt);

  std::vector<double> rhs(st.u);
  if (c != 0.0) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] += dt * c * pos_pow(st.u[i], m.p);
  }
  // Ghost nodes u_{-1} = u_1 + 2h g_left and u_N = u_{N-2} + 2h g_right.
  rhs[0] += 2.0 * dt * gl / h;
  rhs[n - 1] += 2.0 * dt * gr / h;

  std::vector<double> sub(n, -r), diag(n, 1.0 + 2.0 * r), super(n, -r);
  super[0] = -2.0 * r;
  sub[n - 1] = -2.0 * r;
  solve_tridiagonal(sub, diag, super, rhs);

  const double w0 = m.memory_weight ? m.memory_weight(t) : 1.0;
  const double w1 = m.memory_weight ? m.memory_weight(t + dt) : 1.0;
  st.mem_left += 0.5 * dt * (w0 * pos_pow(st.u.front(), m.q) + w1 * pos_pow(rhs.front(), m.q));
  st.mem_right += 0.5 * dt * (w0 * pos_pow(st.u.back(), m.q) + w1 * pos_pow(rhs.back(), m.q));
  st.u = std::move(rhs);
  st.t = t + dt;
  st.last_dt = dt;
  ++st.steps;
}

void step(State& state, const Scenario& s, double dt) { step(state, direct_model(s), s.spacing(), dt); }

double choose_dt(const State& st, const ProblemModel& m, const Scenario& s) {
  const auto& ctl = s.controls;
  const double h = s.spacing();
  if (st.steps == 0) {
    const double init = ctl.dt_init > 0.0 ? ctl.dt_init : ctl.theta * h * h;
    return std::min(ctl.dt_max, init);
  }
  const double sup = sup_norm(st.u);
  double rate = 0.0;
  const double c = m.reaction ? m.reaction(st.t) : 0.0;
  if (sup > 0.0 && c > 0.0) rate += c * std::pow(sup, m.p - 1.0);
  const double g = std::max(std::abs(boundary_flux(m, st.t, st.mem_left, st.t)),
                            std::abs(boundary_flux(m, st.t, st.mem_right, st.t)));
  if (g > 0.0) rate += 2.0 * g / (h * (sup > 0.0 ? sup : 1.0));
  return std::min(ctl.dt_max, ctl.theta / (rate + 1e-30));
}

double choose_dt(const State& state, const Scenario& s) { return choose_dt(state, direct_model(s), s); }

SimulationOutcome run(const Scenario& s) { return run(s, direct_model(s)); }

SimulationOutcome run(const Scenario& s, const ProblemModel& model) {
  s.validate();
  const auto& ctl = s.controls;
  const double h = s.spacing();
  const double snap = ctl.snapshot_interval();
  const double near_blowup = 0.01 * ctl.blowup_threshold;

  SimulationOutcome out;
  State st = initial_state(s);
  out.traces.push_back(make_trace(st, model, h, 0.0));
  if (ctl.keep_fields) out.snapshots.push_back({0.0, st.u});

  long snap_index = 1;
  auto finish = [&](RunStatus status, std::string reason) {
    out.status = status;
    out.reason = std::move(reason);
    out.t_end = st.t;
    out.steps = st.steps;
    out.sup_norm_end = sup_norm(st.u) * scale_at(model, st.t);
    if (status == RunStatus::BlowUp) {
      try {
        out.blowup = estimate_blowup_time(out.traces, s.p, ctl.blowup_threshold);
      } catch (const std::invalid_argument&) {
      }
    }
    return out;
  };

  if (sup_norm(st.u) * scale_at(model, 0.0) >= ctl.blowup_threshold) return finish(RunStatus::BlowUp, "");

  while (true) {
    if (st.steps >= ctl.max_steps) return finish(RunStatus::Aborted, "step budget exhausted");
    double dt = choose_dt(st, model, s);
    const double target = std::min(snap * static_cast<double>(snap_index), ctl.t_max);
    bool landing = false;
    if (st.t + dt >= target - 1e-12 * std::max(1.0, target)) {
      dt = target - st.t;
      landing = true;
    }
    step(st, model, h, dt);
    if (landing) st.t = target;
    out.accepted_dts.push_back(dt);

    double umin = 0.0;
    double sup = 0.0;
    bool finite = true;
    for (double v : st.u) {
      if (std::isnan(v)) finite = false;
      umin = std::min(umin, v);
      sup = std::max(sup, std::abs(v));
    }
    if (!finite) return finish(RunStatus::Aborted, "NaN detected");
    const double scaled = sup * scale_at(model, st.t);
    if (sup > 0.0 && std::isfinite(sup)) {
      out.min_relative_undershoot = std::min(out.min_relative_undershoot, umin / sup);
      if (umin < -1e-10 * sup) return finish(RunStatus::Aborted, "negative undershoot");
    }
    if (!(scaled < ctl.blowup_threshold)) {
      out.traces.push_back(make_trace(st, model, h, dt));
      if (ctl.keep_fields) out.snapshots.push_back({st.t, st.u});
      return finish(RunStatus::BlowUp, "");
    }
    if (landing) {
      out.traces.push_back(make_trace(st, model, h, dt));
      if (ctl.keep_fields) out.snapshots.push_back({st.t, st.u});
      if (target >= ctl.t_max) return finish(RunStatus::GlobalToHorizon, "");
      ++snap_index;
    } else if (scaled >= near_blowup) {
      out.traces.push_back(make_trace(st, model, h, dt));
    }
  }
}

BlowupEstimate estimate_blowup_time(const std::vector<TracePoint>& trace, double p, double threshold) {
  if (trace.empty() || !(trace.back().sup_norm >= threshold)) {
    throw std::invalid_argument("blow-up estimate needs a trace that reaches the threshold");
  }
  std::size_t cross = 0;
  while (trace[cross].sup_norm < threshold) ++cross;
  BlowupEstimate est;
  est.t_cross = trace[cross].t;
  if (cross > 0) {
    const auto& a = trace[cross - 1];
    const auto& b = trace[cross];
    double ya, yb, yt;
    if (p > 1.0) {
      ya = std::pow(a.sup_norm, 1.0 - p);
      yb = std::pow(b.sup_norm, 1.0 - p);
      yt = std::pow(threshold, 1.0 - p);
    } else {
      ya = std::log(std::max(a.sup_norm, 1e-300));
      yb = std::log(b.sup_norm);
      yt = std::log(threshold);
    }
    if (std::isfinite(yb) && yb != ya) {
      est.t_cross = a.t + (yt - ya) / (yb - ya) * (b.t - a.t);
    }
  }
  constexpr std::size_t kFitSamples = 20;
  if (p > 1.0 && cross + 1 >= kFitSamples) {
    const std::size_t first = cross + 1 - kFitSamples;
    const double n = static_cast<double>(kFitSamples);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = first; i <= cross; ++i) {
      mx += trace[i].t;
      my += std::pow(trace[i].sup_norm, 1.0 - p);
    }
    mx /= n;
    my /= n;
    // Centered sums: near blow-up the sample times agree in most of their digits.
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = first; i <= cross; ++i) {
      const double x = trace[i].t - mx;
      const double y = std::pow(trace[i].sup_norm, 1.0 - p) - my;
      sxx += x * x;
      sxy += x * y;
      syy += y * y;
    }
    if (sxx > 0.0 && sxy != 0.0) {
      const double slope = sxy / sxx;
      est.t_fit = mx - my / slope;
      est.fit_quality = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    }
  }
  return est;
}

ComparisonReport verify_comparison(const Scenario& low, const Scenario& high) {
  low.validate();
  high.validate();
  if (low.controls.nodes != high.controls.nodes || low.length != high.length) {
    throw ConfigError("comparison scenarios must share the grid");
  }
  const double h = low.spacing();
  const auto ml = direct_model(low);
  const auto mh = direct_model(high);
  State sl = initial_state(low);
  State sh = initial_state(high);
  if (std::min(low.p, low.q) < 1.0) {
    for (double v : sl.u) {
      if (!(v > 0.0)) throw ConfigError("comparison with min(p,q) < 1 needs strictly positive lower data");
    }
  }
  ComparisonReport rep;
  auto compare = [&]() {
    const double tol = 1e-8 * (1.0 + sup_norm(sh.u));
    for (std::size_t i = 0; i < sl.u.size(); ++i) {
      const double d = sl.u[i] - sh.u[i];
      rep.max_difference = std::max(rep.max_difference, std::abs(d));
      rep.max_violation = std::max(rep.max_violation, d - tol);
    }
    rep.t_compared = sl.t;
  };
  compare();
  const double t_max = std::min(low.controls.t_max, high.controls.t_max);
  const long budget = std::min(low.controls.max_steps, high.controls.max_steps);
  auto status_of = [](const State& st, const Scenario& s) {
    const double sup = sup_norm(st.u);
    return !(sup < s.controls.blowup_threshold) ? RunStatus::BlowUp : RunStatus::GlobalToHorizon;
  };
  while (sl.t < t_max) {
    if (sl.steps >= budget) {
      rep.low_status = rep.high_status = RunStatus::Aborted;
      break;
    }
    double dt = std::min(choose_dt(sl, ml, low), choose_dt(sh, mh, high));
    if (sl.t + dt >= t_max) dt = t_max - sl.t;
    step(sl, ml, h, dt);
    step(sh, mh, h, dt);
    rep.low_status = status_of(sl, low);
    rep.high_status = status_of(sh, high);
    if (rep.low_status == RunStatus::BlowUp || rep.high_status == RunStatus::BlowUp) {
      // Overflowed fields carry no ordering information.
      if (std::isfinite(sup_norm(sl.u)) && std::isfinite(sup_norm(sh.u))) compare();
      break;
    }
    compare();
  }
  rep.max_violation = std::max(0.0, rep.max_violation);
  rep.holds = rep.max_violation == 0.0;
  return rep;
}

double mass_inequality_check(const std::vector<TracePoint>& trace, const Scenario& s) {
  if (s.p < 1.0) throw NotApplicable("mass inequality needs p >= 1");
  const double factor = std::pow(s.length, 1.0 - s.p);
  double deficit = 0.0;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    const auto& a = trace[i];
    const auto& b = trace[i + 1];
    if (!(b.t > a.t) || !std::isfinite(a.mass_w) || !std::isfinite(b.mass_w)) continue;
    double span = b.t - a.t;
    // Consecutive steps: the recorded step is exact where the difference of times is not.
    if (std::abs(span - b.dt) <= 1e-3 * b.dt) span = b.dt;
    const double dw = (b.mass_w - a.mass_w) / span;
    const double cmin = std::min(eval_coeff(s.c, a.t), eval_coeff(s.c, b.t));
    const double rhs = factor * cmin * std::pow(std::max(a.mass_w, 0.0), s.p);
    deficit = std::max(deficit, rhs - dw);
  }
  return deficit;
}

}  // namespace memheat
