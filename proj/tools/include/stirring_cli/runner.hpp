#pragma once

#include "stirring_cli/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace stirring::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverError = 3, kGradcheckFailed = 4 };

struct RunContext {
  std::string command;
  std::ostream* log = nullptr;  // progress lines; nullptr silences them
};

/// Stationary run with the initial-guess controls: length series, interface
/// snapshots and, on the unit square, transport with mix-norm series.
int run_simulate(const ExperimentConfig& config, const RunContext& ctx);

/// Optimizes from the initial guess, writes report.csv, controls.csv and the
/// length series of the optimized flow.
int run_optimize(const ExperimentConfig& config, const RunContext& ctx);

/// Transport validation of `controls` against the stationary reference
/// u_1 = 1, u_k = 0 for k > 1 on the same grid.
int run_validate(const ExperimentConfig& config, const std::filesystem::path& controls, const RunContext& ctx);

/// Adjoint gradient against central differences of the cost on random
/// controls. Returns kGradcheckFailed if any instance exceeds the tolerance.
int run_gradcheck(const ExperimentConfig& config, const RunContext& ctx);

/// Fits every model to a `t,value` series and prints a summary line followed
/// by one JSON line.
int run_rates(const std::filesystem::path& series, FitWindow window, std::ostream& out);

/// Controls CSV with header `n,t,u1..uN`.
void write_controls_csv(const std::filesystem::path& path, const ControlSchedule& controls);
/// Throws ConfigError if the file does not match `grid` and `modes`.
ControlSchedule read_controls_csv(const std::filesystem::path& path, TimeGrid grid, std::size_t modes);

}  // namespace stirring::cli
