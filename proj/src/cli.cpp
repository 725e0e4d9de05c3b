#include "memheat/cli.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "memheat/constructions.hpp"
#include "memheat/errors.hpp"
#include "memheat/ode_oracle.hpp"
#include "memheat/transform.hpp"

namespace memheat {

namespace fs = std::filesystem;

namespace {

std::string status_text(const IntegralVerdict& v) {
  std::string s = to_string(v.status);
  if (v.converges()) s += " value=" + format_number(v.value);
  return s;
}

std::string output_dir(const RunConfig& cfg, const CliOptions& opt) { return opt.out_dir.value_or(cfg.output_dir); }

std::vector<std::string> outcome_lines(const SimulationOutcome& o) {
  std::vector<std::string> lines;
  lines.push_back("OUTCOME: status=" + to_string(o.status));
  lines.push_back("OUTCOME: t_end=" + format_number(o.t_end));
  lines.push_back("OUTCOME: sup_norm_end=" + format_number(o.sup_norm_end));
  lines.push_back("OUTCOME: steps=" + std::to_string(o.steps));
  if (o.blowup) {
    lines.push_back("OUTCOME: t_cross=" + format_number(o.blowup->t_cross));
    if (o.blowup->t_fit) {
      lines.push_back("OUTCOME: t_fit=" + format_number(*o.blowup->t_fit) +
                      " fit_quality=" + format_number(o.blowup->fit_quality.value_or(0.0)));
    }
  }
  if (!o.reason.empty()) lines.push_back("OUTCOME: reason=" + o.reason);
  return lines;
}

void emit(std::ostream& out, const std::vector<std::string>& lines, std::ofstream* copy = nullptr) {
  for (const auto& l : lines) {
    out << l << '\n';
    if (copy) *copy << l << '\n';
  }
}

Scenario effective_scenario(const RunConfig& cfg, const CliOptions& opt) {
  return opt.refine > 0 ? refined(cfg.scenario, opt.refine) : cfg.scenario;
}

int cmd_run(const RunConfig& cfg, const CliOptions& opt, std::ostream& out) {
  Scenario s = effective_scenario(cfg, opt);
  s.controls.keep_fields = true;
  const auto o = run(s);
  const fs::path dir = output_dir(cfg, opt);
  fs::create_directories(dir);
  write_trace_csv((dir / "trace.csv").string(), o.traces);
  for (std::size_t i = 0; i < o.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%06zu.csv", i);
    write_snapshot_csv((dir / name).string(), o.snapshots[i], s.length);
  }
  std::ofstream summary(dir / "summary.txt");
  emit(out, outcome_lines(o), &summary);
  return o.status == RunStatus::Aborted ? kExitAborted : kExitOk;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  const Scenario& s = cfg.scenario;
  RegimeVerdict v = classify_regime(s.p, s.q, s.c, s.k, classify_options(cfg));
  if (v.regime == Regime::GlobalSmallData || v.regime == Regime::BoundedGlobalSmallData) {
    try {
      v.small_data_bound = small_data_bound(s);
    } catch (const NotApplicable&) {
    }
  }
  emit(out, verdict_lines(v));
  return kExitOk;
}

SupersolutionSpec construction_for(const Scenario& s) {
  const double horizon = s.controls.t_max;
  if (std::max(s.p, s.q) <= 1.0) return build_sublinear_supersolution(s, horizon);
  if (std::min(s.p, s.q) > 1.0) return build_small_data_supersolution(s, horizon);
  if (s.p == 1.0 && s.q > 1.0) return build_linear_reaction_supersolution(s, horizon);
  throw NotApplicable("no supersolution construction for p=" + format_number(s.p) + ", q=" + format_number(s.q));
}

int cmd_verify_transform(const Scenario& s, std::ostream& out) {
  const auto rep = equivalence_check(s, s.controls.t_max);
  std::vector<std::string> lines;
  auto route = [&](const char* name, RunStatus st, const std::optional<double>& tc) {
    std::string l = std::string("OUTCOME: route=") + name + " status=" + to_string(st);
    if (tc) l += " t_cross=" + format_number(*tc);
    lines.push_back(l);
  };
  route("direct", rep.direct_status, rep.direct_t_cross);
  route("transformed", rep.transformed_status, rep.transformed_t_cross);
  lines.push_back("RESIDUAL: discrepancy=" + format_number(rep.discrepancy) +
                  " snapshots=" + std::to_string(rep.snapshots) + " t_compared=" + format_number(rep.t_compared));
  bool pass = rep.status_agree;
  if (pass && rep.direct_status == RunStatus::BlowUp) {
    pass = rep.direct_t_cross && rep.transformed_t_cross &&
           std::abs(*rep.direct_t_cross - *rep.transformed_t_cross) <= 0.05 * *rep.direct_t_cross;
  } else if (pass) {
    pass = rep.discrepancy <= 1e-4;
  }
  lines.push_back(std::string("VERDICT: ") + (pass ? "PASS" : "FAIL"));
  emit(out, lines);
  if (rep.direct_status == RunStatus::Aborted || rep.transformed_status == RunStatus::Aborted) return kExitAborted;
  return pass ? kExitOk : kExitVerifyFail;
}

int cmd_verify(const RunConfig& cfg, const CliOptions& opt, std::ostream& out) {
  Scenario s = effective_scenario(cfg, opt);
  if (opt.transform) return cmd_verify_transform(s, out);

  const auto spec = construction_for(s);
  std::vector<std::string> lines;
  std::string head = "RESIDUAL: construction=" + to_string(spec.kind) + " T=" + format_number(spec.horizon);
  if (spec.kind == SupersolutionKind::Sublinear) {
    head += " d=" + format_number(spec.d) + " b=" + format_number(spec.b) + " M=" + format_number(spec.coefficient_max);
  } else {
    head += " alpha=" + format_number(spec.alpha) + " bound=" + format_number(spec.bound);
  }
  lines.push_back(head);
  const auto rep = verify_supersolution(spec, s);
  bool initial_ok = true;
  for (const auto& r : rep.inequalities) {
    lines.push_back("RESIDUAL: " + r.name + " min=" + format_number(r.min_residual) + " tol=" +
                    format_number(r.tolerance) + " x=" + format_number(r.x) + " t=" + format_number(r.t) + " " +
                    (r.pass ? "PASS" : "FAIL"));
    if (r.name == "initial") initial_ok = r.pass;
  }
  bool pass = rep.pass;
  int code = kExitOk;
  if (initial_ok) {
    s.controls.keep_fields = true;
    const auto o = run(s);
    const auto dom = check_domination(o, spec);
    lines.push_back("RESIDUAL: domination max_violation=" + format_number(dom.max_violation) +
                    " snapshots=" + std::to_string(dom.snapshots) + " " + (dom.holds ? "PASS" : "FAIL"));
    for (const auto& l : outcome_lines(o)) lines.push_back(l);
    pass = pass && dom.holds;
    if (o.status == RunStatus::Aborted) code = kExitAborted;
  } else {
    lines.push_back("RESIDUAL: domination not checked, initial data exceeds the construction");
  }
  lines.push_back(std::string("VERDICT: ") + (pass ? "PASS" : "FAIL"));
  emit(out, lines);
  if (code != kExitOk) return code;
  return pass ? kExitOk : kExitVerifyFail;
}

int cmd_sweep(const RunConfig& cfg, const CliOptions& opt, std::ostream& out) {
  auto cells = sweep_cells(cfg);
  if (opt.refine > 0) {
    for (auto& c : cells) c = refined(c, opt.refine);
  }
  const fs::path dir = output_dir(cfg, opt);
  fs::create_directories(dir);
  const ClassifyOptions copt = classify_options(cfg);

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const Scenario& s = cells[i];
        SweepRow& row = rows[i];
        row.p = s.p;
        row.q = s.q;
        row.c = s.c;
        row.k = s.k;
        row.predicted = classify_regime(s.p, s.q, s.c, s.k, copt).regime;
        const auto o = run(s);
        row.outcome = o.status;
        row.t_end = o.t_end;
        row.sup_norm_end = o.sup_norm_end;
        char name[32];
        std::snprintf(name, sizeof name, "cell_%04zu", i);
        fs::create_directories(dir / name);
        write_trace_csv((dir / name / "trace.csv").string(), o.traces);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n = opt.threads > 0 ? static_cast<unsigned>(opt.threads) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::ofstream csv(dir / "sweep.csv");
  csv << sweep_header() << '\n';
  bool aborted = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << sweep_line(rows[i]) << '\n';
    out << "OUTCOME: cell=" << i << ' ' << to_string(rows[i].predicted) << ' ' << to_string(rows[i].outcome) << '\n';
    aborted = aborted || rows[i].outcome == RunStatus::Aborted;
  }
  return aborted ? kExitAborted : kExitOk;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.oracle) throw ConfigError("missing required key 'oracle' for the oracle command");
  const auto& oc = *cfg.oracle;
  OdeProblem prob;
  prob.a = oc.a;
  prob.y_a = oc.y_a;
  prob.yp_a = oc.yp_a;
  prob.q = oc.q;
  prob.b = oc.b;
  const auto o = integrate_ode(prob, oc.r_max);
  const auto crit = check_ode_blowup_criterion(oc.b, oc.q, oc.a, oc.t_large);
  std::vector<std::string> lines;
  std::string l = "OUTCOME: status=" + to_string(o.status);
  if (o.r_star) {
    l += " r_star=" + format_number(*o.r_star) + " refinement_stability=" + format_number(o.refinement_stability);
  } else {
    l += " r_end=" + format_number(o.r_end);
  }
  lines.push_back(l);
  lines.push_back("OUTCOME: steps=" + std::to_string(o.steps));
  lines.push_back(std::string("VERDICT: criterion applies=") + (crit.applies ? "true" : "false") +
                  " divergence=" + status_text(crit.divergence) + " alt_bounded=" + (crit.alt_bounded ? "true" : "false") +
                  " alt_monotone=" + (crit.alt_monotone ? "true" : "false"));
  if (o.status == OdeStatus::GlobalUpTo) {
    lines.push_back("VERDICT: note=GlobalUpTo on a finite horizon is evidence only, not a counterexample");
  }
  emit(out, lines);
  return kExitOk;
}

}  // namespace

ClassifyOptions classify_options(const RunConfig& config) {
  ClassifyOptions o;
  o.k_lower = config.k_lower;
  return o;
}

std::vector<std::string> verdict_lines(const RegimeVerdict& v) {
  std::vector<std::string> lines;
  std::string head = "VERDICT: " + to_string(v.regime) + " via " + v.rule;
  std::string used;
  for (const auto& c : v.conditions) used += (used.empty() ? "" : ",") + c.id;
  if (!used.empty()) head += " [" + used + "]";
  lines.push_back(head);
  for (const auto& c : v.conditions) {
    std::string l = "VERDICT: condition " + c.id + " ";
    if (c.integral) {
      l += status_text(*c.integral);
    } else {
      l += c.flag.value_or(false) ? "holds" : "fails";
    }
    if (!c.evidence.empty()) l += " evidence=" + c.evidence;
    lines.push_back(l);
  }
  if (v.small_data_bound) lines.push_back("VERDICT: small_data_bound=" + format_number(*v.small_data_bound));
  if (!v.note.empty()) lines.push_back("VERDICT: note=" + v.note);
  return lines;
}

void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << "t,sup_norm,mass_w,M_left,M_right,dt\n";
  for (const auto& p : trace) {
    f << format_number(p.t) << ',' << format_number(p.sup_norm) << ',' << format_number(p.mass_w) << ',' << format_number(p.mem_left) << ','
      << format_number(p.mem_right) << ',' << format_number(p.dt) << '\n';
  }
}

void write_snapshot_csv(const std::string& path, const Snapshot& snap, double length) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << "x,u\n";
  const std::size_t n = snap.u.size();
  for (std::size_t i = 0; i < n; ++i) {
    f << format_number(length * static_cast<double>(i) / static_cast<double>(n - 1)) << ',' << format_number(snap.u[i]) << '\n';
  }
}

std::vector<Scenario> sweep_cells(const RunConfig& config) {
  const Scenario& base = config.scenario;
  const auto& g = config.sweep;
  auto or_base = [](const auto& list, const auto& value) {
    using T = std::decay_t<decltype(value)>;
    return list.empty() ? std::vector<T>{value} : std::vector<T>(list.begin(), list.end());
  };
  const auto ps = or_base(g.p, base.p);
  const auto qs = or_base(g.q, base.q);
  const auto cs = or_base(g.c, base.c);
  const auto ks = or_base(g.k, base.k);
  const auto vs = g.initial_value.empty() ? std::vector<std::optional<double>>{std::nullopt}
                                          : std::vector<std::optional<double>>(g.initial_value.begin(),
                                                                               g.initial_value.end());
  std::vector<Scenario> cells;
  for (double p : ps) {
    for (double q : qs) {
      for (const auto& c : cs) {
        for (const auto& k : ks) {
          for (const auto& v : vs) {
            Scenario s = base;
            s.p = p;
            s.q = q;
            s.c = c;
            s.k = k;
            if (v) {
              if (s.u0.family == InitialFamily::Tabulated) throw ConfigError("sweep.initial_value needs non-tabulated initial data");
              s.u0.value = *v;
            }
            s.validate();
            cells.push_back(std::move(s));
          }
        }
      }
    }
  }
  return cells;
}

std::string sweep_header() { return "p,q,c_family,c_gamma,k_family,k_gamma,regime_predicted,outcome,t_end,sup_norm_end"; }

std::string sweep_line(const SweepRow& r) {
  std::ostringstream os;
  os << format_number(r.p) << ',' << format_number(r.q) << ',' << to_string(r.c.family) << ','
     << format_number(r.c.gamma) << ',' << to_string(r.k.family) << ',' << format_number(r.k.gamma) << ','
     << to_string(r.predicted) << ',' << to_string(r.outcome) << ',' << format_number(r.t_end) << ','
     << format_number(r.sup_norm_end);
  return os.str();
}

int dispatch(const std::string& command, const RunConfig& config, const CliOptions& options, std::ostream& out) {
  if (command == "run") return cmd_run(config, options, out);
  if (command == "classify") return cmd_classify(config, out);
  if (command == "verify") return cmd_verify(config, options, out);
  if (command == "sweep") return cmd_sweep(config, options, out);
  if (command == "oracle") return cmd_oracle(config, out);
  throw ConfigError("unknown command '" + command + "'");
}

int cli_main(int argc, char** argv) {
  CLI::App app{"memheat: heat equation with nonlinear memory boundary flux"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  CliOptions opt;
  app.add_option("command", command, "run | classify | verify | sweep | oracle")
      ->required()
      ->check(CLI::IsMember({"run", "classify", "verify", "sweep", "oracle"}));
  app.add_option("--config", config_path, "scenario JSON")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--refine", opt.refine, "double N and halve theta, dt_max this many times")->check(CLI::NonNegativeNumber);
  app.add_flag("--transform", opt.transform, "verify: compare direct and transformed p = 1 routes");
  app.add_option("--threads", opt.threads, "sweep workers (0 = all cores)")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  if (!out_dir.empty()) opt.out_dir = out_dir;

  try {
    const RunConfig cfg = load_config(config_path);
    return dispatch(command, cfg, opt, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NotApplicable& e) {
    std::cerr << "not applicable: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace memheat
