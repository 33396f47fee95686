#include "stirring/optimizer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "stirring/errors.hpp"
#include "stirring/parallel.hpp"

namespace stirring {

namespace {

// Delta-t weighted inner product on control space.
double inner(const ControlSchedule& a, const ControlSchedule& b) {
  const auto x = a.values();
  const auto y = b.values();
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = x[i] * y[i];
  return a.grid().dt() * pairwise_sum(t);
}

ControlSchedule axpy(const ControlSchedule& u, double eta, const ControlSchedule& d) {
  std::vector<double> v(u.values().begin(), u.values().end());
  const auto dv = d.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += eta * dv[i];
  return {u.grid(), u.modes(), std::move(v)};
}

ControlSchedule scaled(const ControlSchedule& u, double s) {
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x *= s;
  return {u.grid(), u.modes(), std::move(v)};
}

// Riesz representer of dJ_h in the weighted inner product: dJ/du_{k,n} / dt.
ControlSchedule l2_gradient(const ControlProblem& problem, const ControlSchedule& u, const Trajectory& traj) {
  ControlSchedule g = adjoint_gradient(traj, u, problem.basis, problem.length, problem.forward);
  return scaled(g, 1.0 / u.grid().dt());
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(c1 > 0.0 && c1 < 1.0)) throw std::invalid_argument("Armijo constant must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw std::invalid_argument("backtracking factor must lie in (0, 1)");
  if (!(tol > 0.0)) throw std::invalid_argument("stopping tolerance must be positive");
  if (!(initial_step > 0.0)) throw std::invalid_argument("initial step must be positive");
  if (!(ball_radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  if (max_backtracks < 1 || max_iters < 0) throw std::invalid_argument("iteration limits must be positive");
}

Evaluation evaluate(const ControlProblem& problem, const ControlSchedule& controls) {
  Trajectory traj = integrate(problem.initial, controls, problem.basis, problem.forward);
  const CostBreakdown cost = evaluate_cost(traj, controls, problem.basis, problem.length);
  return {cost, std::move(traj)};
}

ControlSchedule project_ball(const ControlSchedule& controls, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  const double nrm = controls.l2_norm();
  if (nrm <= radius) return controls;
  return scaled(controls, radius / nrm);
}

std::optional<double> pr_beta(std::span<const double> g_new, std::span<const double> g_old) {
  if (g_new.size() != g_old.size()) throw ShapeError("gradients differ in size");
  std::vector<double> num(g_new.size()), den(g_old.size());
  for (std::size_t i = 0; i < g_new.size(); ++i) {
    num[i] = g_new[i] * (g_new[i] - g_old[i]);
    den[i] = g_old[i] * g_old[i];
  }
  const double d = pairwise_sum(den);
  if (d == 0.0) return std::nullopt;
  return std::max(0.0, pairwise_sum(num) / d);
}

OptimizationReport optimize(const ControlProblem& problem, const ControlSchedule& u0, const OptimizerConfig& cfg,
                            const IterationCallback& on_iteration) {
  cfg.validate();
  if (!(u0.grid() == problem.grid)) throw ShapeError("initial controls do not match the problem time grid");
  if (u0.modes() != problem.basis.size()) throw ShapeError("initial controls do not match the basis size");

  OptimizationReport report;
  ControlSchedule u = project_ball(u0, cfg.ball_radius);
  Evaluation current = evaluate(problem, u);
  ControlSchedule g = l2_gradient(problem, u, current.trajectory);
  ControlSchedule d = scaled(g, -1.0);

  auto push = [&](IterationRecord rec) {
    report.per_iteration.push_back(rec);
    if (on_iteration) on_iteration(rec);
  };
  {
    IterationRecord rec;
    rec.cost = current.cost.total;
    rec.length_term = current.cost.length_term;
    rec.penalty_term = current.cost.penalty_term;
    rec.grad_norm = std::sqrt(inner(g, g));
    rec.ball_active = u0.l2_norm() > cfg.ball_radius;
    rec.ball_ratio = u.l2_norm() / cfg.ball_radius;
    push(rec);
  }

  // Trial step 0 means "take a displacement of norm initial_step along d".
  double trial = 0.0;
  bool stopped = false;
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (inner(g, g) == 0.0) {
      report.converged = true;
      report.diagnostic = "gradient vanished";
      stopped = true;
      break;
    }

    double eta = trial > 0.0 ? trial : cfg.initial_step / std::sqrt(inner(d, d));
    int backtracks = 0;
    bool accepted = false;
    bool ball_active = false;
    ControlSchedule u_next;
    std::optional<Evaluation> next;
    for (; backtracks <= cfg.max_backtracks; ++backtracks) {
      const ControlSchedule raw = axpy(u, eta, d);
      ball_active = raw.l2_norm() > cfg.ball_radius;
      ControlSchedule candidate = ball_active ? project_ball(raw, cfg.ball_radius) : raw;
      try {
        Evaluation e = evaluate(problem, candidate);
        if (e.cost.total <= current.cost.total + cfg.c1 * inner(g, axpy(candidate, -1.0, u))) {
          u_next = std::move(candidate);
          next.emplace(std::move(e));
          accepted = true;
          break;
        }
      } catch (const IntegrationError&) {
        // Trial step too aggressive for the time step; shrink it.
      }
      eta *= cfg.backtrack_factor;
    }
    if (!accepted) {
      report.converged = false;
      report.diagnostic = fmt::format("line search failed after {} backtracks at iteration {}", cfg.max_backtracks, it + 1);
      stopped = true;
      break;
    }

    ControlSchedule g_next = l2_gradient(problem, u_next, next->trajectory);
    double beta = 0.0;
    if (!cfg.steepest_descent) beta = pr_beta(g_next.values(), g.values()).value_or(0.0);
    ControlSchedule d_next = axpy(scaled(g_next, -1.0), beta, d);
    bool reset = false;
    if (inner(g_next, d_next) >= 0.0) {
      d_next = scaled(g_next, -1.0);
      reset = true;
    }

    if (cfg.barzilai_borwein) {
      const ControlSchedule s = axpy(u_next, -1.0, u);
      const ControlSchedule y = axpy(g_next, -1.0, g);
      const double sy = inner(s, y);
      const double ss = inner(s, s);
      trial = (sy > 0.0 && ss > 0.0) ? ss / sy : 2.0 * eta;
    } else {
      trial = 0.0;
    }

    const double j_prev = current.cost.total;
    u = std::move(u_next);
    current = std::move(*next);
    g = std::move(g_next);
    d = std::move(d_next);

    IterationRecord rec;
    rec.iteration = static_cast<std::size_t>(it) + 1;
    rec.cost = current.cost.total;
    rec.length_term = current.cost.length_term;
    rec.penalty_term = current.cost.penalty_term;
    rec.grad_norm = std::sqrt(inner(g, g));
    rec.step_size = eta;
    rec.pr_beta = beta;
    rec.reset = reset;
    rec.ball_active = ball_active;
    rec.ball_ratio = u.l2_norm() / cfg.ball_radius;
    rec.backtracks = backtracks;
    push(rec);

    if (std::abs(current.cost.total - j_prev) / (1.0 + std::abs(current.cost.total)) < cfg.tol) {
      report.converged = true;
      report.diagnostic = "relative cost change below tolerance";
      stopped = true;
      break;
    }
  }
  if (!stopped) {
    report.converged = false;
    report.diagnostic = fmt::format("reached max_iters = {}", cfg.max_iters);
  }
  report.iterations = report.per_iteration.size() - 1;
  report.final_controls = std::move(u);
  report.final_cost = current.cost;
  return report;
}

void write_report_csv(const std::string& path, const OptimizationReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "iteration,cost,length_term,penalty_term,grad_norm,step_size,pr_beta,reset,ball_active,ball_ratio,backtracks\n";
  for (const auto& r : report.per_iteration) {
    os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{:.17g},{}\n", r.iteration, r.cost,
                      r.length_term, r.penalty_term, r.grad_norm, r.step_size, r.pr_beta, r.reset ? 1 : 0,
                      r.ball_active ? 1 : 0, r.ball_ratio, r.backtracks);
  }
}

}  // namespace stirring
