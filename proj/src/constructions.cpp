#include "memheat/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "memheat/criteria.hpp"
#include "memheat/errors.hpp"

namespace memheat {

namespace {

constexpr double kPi = std::numbers::pi;

double coefficient_max(const CoefficientSpec& f, double horizon) {
  constexpr int kSamples = 10000;
  double m = std::max(eval_coeff(f, 0.0), eval_coeff(f, horizon));
  for (int i = 1; i < kSamples; ++i) m = std::max(m, eval_coeff(f, horizon * i / kSamples));
  for (const auto& [t, v] : f.table) {
    if (t >= 0.0 && t <= horizon) m = std::max(m, v);
  }
  return m;
}

std::vector<double> initial_on_nodes(const Scenario& s, int nodes) {
  if (nodes == s.controls.nodes) return s.u0.sample(s.length, nodes);
  if (s.u0.family != InitialFamily::Tabulated) return s.u0.sample(s.length, nodes);
  const auto& src = s.u0.nodes;
  const double ratio = static_cast<double>(src.size() - 1) / (nodes - 1);
  std::vector<double> out(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double pos = i * ratio;
    const auto j = std::min(static_cast<std::size_t>(pos), src.size() - 2);
    const double w = pos - j;
    out[i] = (1.0 - w) * src[j] + w * src[j + 1];
  }
  return out;
}

// Smallest normalized residual and where it happened.
struct Tracker {
  double min = std::numeric_limits<double>::infinity();
  double x = 0.0;
  double t = 0.0;

  void add(double r, double x_, double t_) {
    if (r < min) {
      min = r;
      x = x_;
      t = t_;
    }
  }
};

std::shared_ptr<const AuxiliaryTrajectory> solve_aux_for(const SupersolutionSpec& spec) {
  return std::make_shared<const AuxiliaryTrajectory>(
      solve_auxiliary_linear(spec.aux_flux, spec.length, spec.aux_controls));
}

}  // namespace

Eigenpair dirichlet_eigenpair(double length, int nodes) {
  if (nodes < 3) throw ConfigError("eigenpair needs at least 3 nodes");
  Eigenpair e;
  e.lambda1 = (kPi / length) * (kPi / length);
  e.inward_slope = kPi / length;
  e.phi.resize(nodes);
  const double h = length / (nodes - 1);
  for (int i = 0; i < nodes; ++i) e.phi[i] = std::sin(kPi * i * h / length);
  e.phi.front() = 0.0;
  e.phi.back() = 0.0;
  return e;
}

std::vector<double> AuxiliaryTrajectory::at(double t) const {
  if (times.empty()) throw std::logic_error("empty auxiliary trajectory");
  if (t <= times.front()) return fields.front();
  if (t >= times.back()) return fields.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  std::vector<double> out(fields[j].size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * fields[j - 1][i] + w * fields[j][i];
  return out;
}

AuxiliaryTrajectory solve_auxiliary_linear(const std::function<double(double)>& flux, double length,
                                           const AuxiliaryControls& ctl) {
  if (ctl.nodes < 3 || !(ctl.horizon >= ctl.t_store) || !(ctl.t_store > 0.0)) {
    throw ConfigError("auxiliary solve needs nodes >= 3 and 0 < t_store <= horizon");
  }
  ProblemModel model;
  model.prescribed_flux = flux;
  const double h = length / (ctl.nodes - 1);

  AuxiliaryTrajectory aux;
  aux.length = length;
  aux.horizon = ctl.horizon;
  State st;
  st.u.assign(ctl.nodes, 1.0);
  aux.times.push_back(0.0);
  aux.fields.push_back(st.u);

  double running = 1.0;
  double at_half = -1.0;
  const double half = 0.5 * ctl.horizon;
  while (st.t < ctl.horizon) {
    double dt = st.steps == 0 ? ctl.dt_first
                              : std::min({ctl.dt_fraction * (1.0 + st.t), ctl.dt_cap, 1.2 * st.last_dt});
    double target = st.t < ctl.t_store ? ctl.t_store : ctl.horizon;
    bool landing = false;
    if (st.t + dt >= target) {
      dt = target - st.t;
      landing = true;
    }
    step(st, model, h, dt);
    if (landing) st.t = target;
    for (double v : st.u) {
      if (!std::isfinite(v)) throw std::runtime_error("auxiliary solve produced a non-finite value");
    }
    running = std::max(running, sup_norm(st.u));
    if (at_half < 0.0 && st.t >= half) at_half = running;
    if (st.t <= ctl.t_store) {
      aux.times.push_back(st.t);
      aux.fields.push_back(st.u);
    }
  }
  aux.bound = running;
  aux.stabilized = (running - at_half) <= 1e-4 * running;
  return aux;
}

double z_profile(double p, double alpha, double bound, const Primitive& c, double t) {
  if (!(p > 1.0)) throw NotApplicable("z profile needs p > 1");
  const double total = c.total();
  if (!std::isfinite(total)) throw NotApplicable("z profile needs a convergent reaction integral");
  const double tail = std::max(0.0, total - c.value(t));
  return std::pow(1.0 + (p - 1.0) * std::pow(alpha * bound, p - 1.0) * tail, -1.0 / (p - 1.0));
}

double z_profile(double p, double alpha, double bound, const CoefficientSpec& c, double t) {
  return z_profile(p, alpha, bound, Primitive(c), t);
}

double z_residual(double p, double alpha, double bound, const CoefficientSpec& c, double t, double step) {
  const Primitive prim(c);
  auto z = [&](double s) { return z_profile(p, alpha, bound, prim, s); };
  double dz;
  if (t >= 2.0 * step) {
    dz = (-z(t + 2 * step) + 8 * z(t + step) - 8 * z(t - step) + z(t - 2 * step)) / (12.0 * step);
  } else {
    dz = (-25 * z(t) + 48 * z(t + step) - 36 * z(t + 2 * step) + 16 * z(t + 3 * step) - 3 * z(t + 4 * step)) /
         (12.0 * step);
  }
  return dz - std::pow(alpha * bound, p - 1.0) * eval_coeff(c, t) * std::pow(z(t), p);
}

double small_data_threshold(double p, double alpha, double bound, const CoefficientSpec& c) {
  return alpha * z_profile(p, alpha, bound, c, 0.0);
}

std::string to_string(SupersolutionKind k) {
  switch (k) {
    case SupersolutionKind::Sublinear: return "sublinear";
    case SupersolutionKind::SmallData: return "small-data";
    case SupersolutionKind::LinearReaction: return "linear-reaction";
  }
  return "?";
}

std::vector<double> SupersolutionSpec::field(double t) const {
  std::vector<double> out(nodes);
  switch (kind) {
    case SupersolutionKind::Sublinear: {
      const double h = length / (nodes - 1);
      const double amp = d * std::exp(b * t);
      for (int i = 0; i < nodes; ++i) {
        const double phi = (i == 0 || i == nodes - 1) ? 0.0 : std::sin(kPi * i * h / length);
        out[i] = amp * (2.0 - phi);
      }
      return out;
    }
    case SupersolutionKind::SmallData: {
      const double z = c.is_zero() ? 1.0 : z_profile(p, alpha, bound, *cumulative, t);
      out = aux->at(t);
      for (double& v : out) v *= alpha * z;
      return out;
    }
    case SupersolutionKind::LinearReaction: {
      const double g = alpha * std::exp(cumulative->value(t));
      out = aux->at(t);
      for (double& v : out) v *= g;
      return out;
    }
  }
  return out;
}

std::vector<double> SupersolutionSpec::time_grid() const {
  std::vector<double> ts;
  if (kind == SupersolutionKind::Sublinear) {
    const long levels =
        time_refinement * std::max(200L, static_cast<long>(std::ceil(horizon * std::max(b, 1.0) / 0.05)));
    ts.reserve(levels + 1);
    for (long n = 0; n <= levels; ++n) ts.push_back(horizon * static_cast<double>(n) / levels);
    return ts;
  }
  for (double t : aux->times) {
    if (t <= horizon * (1.0 + 1e-12)) ts.push_back(t);
  }
  return ts;
}

SupersolutionSpec SupersolutionSpec::refined() const {
  SupersolutionSpec r = *this;
  r.nodes = 2 * nodes - 1;
  r.time_refinement = 2 * time_refinement;
  if (kind != SupersolutionKind::Sublinear) {
    r.aux_controls.nodes = r.nodes;
    r.aux_controls.dt_fraction *= 0.5;
    r.aux_controls.dt_first *= 0.5;
    r.aux_controls.dt_cap *= 0.5;
    r.aux = solve_aux_for(r);
  }
  return r;
}

SupersolutionSpec build_sublinear_supersolution(const Scenario& s, double horizon) {
  if (std::max(s.p, s.q) > 1.0) throw NotApplicable("sublinear supersolution needs max(p, q) <= 1");
  SupersolutionSpec spec;
  spec.kind = SupersolutionKind::Sublinear;
  spec.length = s.length;
  spec.nodes = s.controls.nodes;
  spec.p = s.p;
  spec.q = s.q;
  spec.c = s.c;
  spec.horizon = horizon;
  const Eigenpair e = dirichlet_eigenpair(s.length, s.controls.nodes);
  spec.lambda1 = e.lambda1;
  spec.coefficient_max = std::max(coefficient_max(s.c, horizon), coefficient_max(s.k, horizon));
  const double m = spec.coefficient_max;
  spec.b = std::max(e.lambda1 + 2.0 * m, 2.0 * m / (s.q * e.inward_slope));
  spec.d = std::max(sup_norm(s.u0.sample(s.length, s.controls.nodes)), 1.0);
  return spec;
}

SupersolutionSpec build_small_data_supersolution(const Scenario& s, double horizon, std::optional<double> alpha,
                                                 const AuxiliaryControls& aux) {
  if (!(std::min(s.p, s.q) > 1.0)) throw NotApplicable("small-data supersolution needs min(p, q) > 1");
  auto prim = std::make_shared<const Primitive>(s.c);
  if (!std::isfinite(prim->total())) throw NotApplicable("reaction integral diverges");
  SupersolutionSpec spec;
  spec.cumulative = prim;
  spec.kind = SupersolutionKind::SmallData;
  spec.length = s.length;
  spec.nodes = s.controls.nodes;
  spec.p = s.p;
  spec.q = s.q;
  spec.c = s.c;
  spec.horizon = horizon;
  spec.aux_flux = [k = s.k](double t) { return t * eval_coeff(k, t); };
  spec.aux_controls = aux;
  spec.aux_controls.nodes = s.controls.nodes;
  spec.aux_controls.t_store = horizon;
  spec.aux_controls.horizon = std::max(aux.horizon, horizon);
  spec.aux = solve_aux_for(spec);
  spec.bound = spec.aux->bound;
  spec.bound_stabilized = spec.aux->stabilized;
  if (!spec.bound_stabilized) throw NotApplicable("auxiliary bound Y did not stabilize");
  const double cap = std::pow(spec.bound, -s.q / (s.q - 1.0));
  spec.alpha = alpha ? std::min(*alpha, cap) : cap;
  return spec;
}

SupersolutionSpec build_linear_reaction_supersolution(const Scenario& s, double horizon, std::optional<double> alpha,
                                                      const AuxiliaryControls& aux) {
  if (s.p != 1.0 || !(s.q > 1.0)) throw NotApplicable("linear-reaction supersolution needs p = 1 < q");
  SupersolutionSpec spec;
  spec.kind = SupersolutionKind::LinearReaction;
  spec.length = s.length;
  spec.nodes = s.controls.nodes;
  spec.p = s.p;
  spec.q = s.q;
  spec.c = s.c;
  spec.horizon = horizon;
  auto prim = std::make_shared<const Primitive>(s.c);
  spec.cumulative = prim;
  spec.bounded_in_time = std::isfinite(prim->total());
  spec.aux_flux = [q = s.q, prim, k = s.k](double t) { return effective_flux(q, *prim, k, t); };
  spec.aux_controls = aux;
  spec.aux_controls.nodes = s.controls.nodes;
  spec.aux_controls.t_store = horizon;
  spec.aux_controls.horizon = std::max(aux.horizon, horizon);
  spec.aux = solve_aux_for(spec);
  spec.bound = spec.aux->bound;
  spec.bound_stabilized = spec.aux->stabilized;
  if (!spec.bound_stabilized) throw NotApplicable("auxiliary bound H did not stabilize");
  const double cap = std::pow(spec.bound, -s.q / (s.q - 1.0));
  spec.alpha = alpha ? std::min(*alpha, cap) : cap;
  return spec;
}

double small_data_bound(const Scenario& s) {
  if (std::min(s.p, s.q) > 1.0) {
    const auto spec = build_small_data_supersolution(s, 1.0);
    return spec.c.is_zero() ? spec.alpha : small_data_threshold(s.p, spec.alpha, spec.bound, s.c);
  }
  if (s.p == 1.0 && s.q > 1.0) return build_linear_reaction_supersolution(s, 1.0).alpha;
  throw NotApplicable("no small-data construction for these exponents");
}

std::vector<InequalityResidual> supersolution_residuals(const SupersolutionSpec& spec, const Scenario& s) {
  const int n = spec.nodes;
  const double h = spec.length / (n - 1);
  const auto ts = spec.time_grid();
  if (ts.size() < 2) throw std::logic_error("supersolution time grid needs two levels");
  const bool centered = spec.kind == SupersolutionKind::Sublinear;

  Tracker interior, boundary, initial;

  const auto u0 = initial_on_nodes(s, n);
  std::vector<double> prev, cur = spec.field(ts[0]), next = spec.field(ts[1]);
  for (int i = 0; i < n; ++i) {
    initial.add((cur[i] - u0[i]) / (1.0 + std::abs(cur[i]) + std::abs(u0[i])), i * h, 0.0);
  }

  double mem_left = 0.0, mem_right = 0.0;
  auto add_boundary = [&](const std::vector<double>& f, double t) {
    const double k = eval_coeff(s.k, t);
    const double dn_left = (3.0 * f[0] - 4.0 * f[1] + f[2]) / (2.0 * h);
    const double dn_right = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    boundary.add((dn_left - k * mem_left) / (1.0 + std::abs(dn_left) + std::abs(k * mem_left)), 0.0, t);
    boundary.add((dn_right - k * mem_right) / (1.0 + std::abs(dn_right) + std::abs(k * mem_right)), spec.length, t);
  };
  auto pos_pow = [](double v, double e) { return v > 0.0 ? std::pow(v, e) : 0.0; };
  add_boundary(cur, ts[0]);

  for (std::size_t m = 0; m < ts.size(); ++m) {
    const double t = ts[m];
    if (m > 0) {
      const double dt = t - ts[m - 1];
      mem_left += 0.5 * dt * (pos_pow(prev[0], spec.q) + pos_pow(cur[0], spec.q));
      mem_right += 0.5 * dt * (pos_pow(prev[n - 1], spec.q) + pos_pow(cur[n - 1], spec.q));
      add_boundary(cur, t);
    }
    const bool has_next = m + 1 < ts.size();
    // Interior: centered differences for closed forms, backward differences for sampled fields
    // (they carry the backward-Euler structure of the auxiliary run).
    if (centered || m > 0) {
      const double c = eval_coeff(s.c, t);
      // second-order one-sided stencil at the ends of the uniform closed-form grid
      std::vector<double> far;
      if (centered && ts.size() > 2 && (m == 0 || !has_next)) far = spec.field(m == 0 ? ts[2] : ts[m - 2]);
      for (int i = 1; i < n - 1; ++i) {
        double ut;
        if (centered && m > 0 && has_next) {
          ut = (next[i] - prev[i]) / (ts[m + 1] - ts[m - 1]);
        } else if (!far.empty()) {
          ut = m == 0 ? (-3.0 * cur[i] + 4.0 * next[i] - far[i]) / (ts[2] - t)
                      : (3.0 * cur[i] - 4.0 * prev[i] + far[i]) / (t - ts[m - 2]);
        } else if (m > 0) {
          ut = (cur[i] - prev[i]) / (t - ts[m - 1]);
        } else {
          ut = (next[i] - cur[i]) / (ts[1] - t);
        }
        const double lap = (cur[i - 1] - 2.0 * cur[i] + cur[i + 1]) / (h * h);
        const double react = c * pos_pow(cur[i], spec.p);
        interior.add((ut - lap - react) / (1.0 + std::abs(ut) + std::abs(lap) + std::abs(react)), i * h, t);
      }
    }
    if (!has_next) break;
    prev = std::move(cur);
    cur = std::move(next);
    if (m + 2 < ts.size()) next = spec.field(ts[m + 2]);
  }

  std::vector<InequalityResidual> out;
  for (auto [name, tr] : {std::pair{"interior", interior}, {"boundary", boundary}, {"initial", initial}}) {
    InequalityResidual r;
    r.name = name;
    r.min_residual = tr.min;
    r.x = tr.x;
    r.t = tr.t;
    out.push_back(r);
  }
  return out;
}

ResidualReport verify_supersolution(const SupersolutionSpec& spec, const Scenario& s) {
  auto base = supersolution_residuals(spec, s);
  const auto fine = supersolution_residuals(spec.refined(), s);
  ResidualReport rep;
  rep.pass = true;
  for (std::size_t j = 0; j < base.size(); ++j) {
    // With error C (h^2 + dt), one refinement removes between half and three quarters of it, so
    // twice the observed change bounds C (h^2 + dt) on the base grid.
    base[j].tolerance = 1e-6 + 2.0 * std::abs(base[j].min_residual - fine[j].min_residual);
    base[j].pass = base[j].min_residual >= -base[j].tolerance;
    rep.pass = rep.pass && base[j].pass;
  }
  rep.inequalities = std::move(base);
  return rep;
}

DominationReport check_domination(const SimulationOutcome& run, const SupersolutionSpec& spec) {
  DominationReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& snap : run.snapshots) {
    if (snap.t > spec.horizon * (1.0 + 1e-12)) break;
    if (static_cast<int>(snap.u.size()) != spec.nodes) throw ConfigError("domination check needs matching grids");
    const auto ub = spec.field(snap.t);
    const double tol = 1e-8 * (1.0 + sup_norm(ub));
    for (std::size_t i = 0; i < ub.size(); ++i) {
      rep.min_margin = std::min(rep.min_margin, ub[i] - snap.u[i]);
      rep.max_violation = std::max(rep.max_violation, snap.u[i] - ub[i] - tol);
    }
    ++rep.snapshots;
  }
  rep.holds = rep.max_violation <= 0.0;
  rep.max_violation = std::max(rep.max_violation, 0.0);
  return rep;
}

}  // namespace memheat
