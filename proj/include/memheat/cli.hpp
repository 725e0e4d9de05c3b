#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "memheat/config.hpp"
#include "memheat/criteria.hpp"
#include "memheat/pde.hpp"

namespace memheat {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitAborted = 3, kExitVerifyFail = 4 };

struct CliOptions {
  std::optional<std::string> out_dir;  // overrides output.dir
  int refine = 0;
  bool transform = false;
  int threads = 0;  // sweep workers, 0 = hardware concurrency
};

/// Runs one subcommand on a parsed config, printing the report to `out`.
int dispatch(const std::string& command, const RunConfig& config, const CliOptions& options, std::ostream& out);

/// Full command line entry point: parses arguments, loads the config, maps errors to exit codes.
int cli_main(int argc, char** argv);

ClassifyOptions classify_options(const RunConfig& config);

std::vector<std::string> verdict_lines(const RegimeVerdict& v);

void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace);
void write_snapshot_csv(const std::string& path, const Snapshot& snap, double length);

/// One row of sweep.csv per cell, in input order.
struct SweepRow {
  double p = 0.0;
  double q = 0.0;
  CoefficientSpec c;
  CoefficientSpec k;
  Regime predicted = Regime::Indeterminate;
  RunStatus outcome = RunStatus::Aborted;
  double t_end = 0.0;
  double sup_norm_end = 0.0;
};

/// Cartesian product of the sweep overrides applied to the base scenario.
std::vector<Scenario> sweep_cells(const RunConfig& config);

std::string sweep_header();
std::string sweep_line(const SweepRow& row);

}  // namespace memheat
