#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stirring/adjoint.hpp"

namespace stirring {

struct OptimizerConfig {
  double c1 = 1e-4;               // Armijo constant
  double backtrack_factor = 0.5;  // step shrink ratio
  double initial_step = 1.0;       // norm of the first trial displacement
  int max_backtracks = 40;
  double tol = 1e-6;  // relative cost change that stops the iteration
  int max_iters = 500;
  double ball_radius = 10.0;
  /// Warm-start each line search with a Barzilai-Borwein step.
  bool barzilai_borwein = true;
  /// Force beta = 0, i.e. projected gradient descent.
  bool steepest_descent = false;

  void validate() const;
};

/// Everything that defines J_h except the controls.
struct ControlProblem {
  FlowBasis basis;
  MarkerSet initial;
  TimeGrid grid;
  LengthParams length{};
  ForwardOptions forward{};
};

struct Evaluation {
  CostBreakdown cost;
  Trajectory trajectory;
};

/// Forward solve plus cost.
Evaluation evaluate(const ControlProblem& problem, const ControlSchedule& controls);

struct IterationRecord {
  std::size_t iteration = 0;
  double cost = 0.0;
  double length_term = 0.0;
  double penalty_term = 0.0;
  double grad_norm = 0.0;  // L2(0,T) norm of the gradient
  double step_size = 0.0;
  double pr_beta = 0.0;
  bool reset = false;
  bool ball_active = false;
  double ball_ratio = 0.0;  // ||u||_{L2} / R_u
  int backtracks = 0;
};

struct OptimizationReport {
  std::vector<IterationRecord> per_iteration;
  ControlSchedule final_controls;
  CostBreakdown final_cost;
  std::size_t iterations = 0;
  bool converged = false;
  std::string diagnostic;
};

/// Radial projection onto {||u||_{L2} <= radius}: scales by
/// min(1, radius / ||u||).
ControlSchedule project_ball(const ControlSchedule& controls, double radius);

/// max(0, <g_new, g_new - g_old> / ||g_old||^2), or nullopt when g_old = 0.
std::optional<double> pr_beta(std::span<const double> g_new, std::span<const double> g_old);

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Projected Polak-Ribiere conjugate gradient with Armijo backtracking
/// evaluated at the projected trial point. The initial guess is projected
/// onto the ball before the first forward solve.
OptimizationReport optimize(const ControlProblem& problem, const ControlSchedule& u0, const OptimizerConfig& cfg,
                            const IterationCallback& on_iteration = {});

/// Writes the per-iteration table as CSV.
void write_report_csv(const std::string& path, const OptimizationReport& report);

}  // namespace stirring
