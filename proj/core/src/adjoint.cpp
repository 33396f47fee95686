#include "stirring/adjoint.hpp"

#include <array>
#include <stdexcept>

#include "stirring/errors.hpp"
#include "stirring/parallel.hpp"

namespace stirring {

namespace {

void check_shapes(const Trajectory& traj, const ControlSchedule& controls, const FlowBasis& basis) {
  if (!(traj.grid() == controls.grid())) throw ShapeError("trajectory and controls use different time grids");
  if (controls.modes() != basis.size()) throw ShapeError("control schedule and basis disagree on mode count");
}

// Walks the trajectory backwards one checkpoint segment at a time and calls
// visit(n, X_n, X_{n+1}) for n = M-1 down to 0.
template <typename Visit>
void for_each_step_backward(const Trajectory& traj, const ControlSchedule& controls, const FlowBasis& basis,
                            const ForwardOptions& options, Visit&& visit) {
  const std::size_t m = traj.grid().M;
  if (traj.dense()) {
    for (std::size_t n = m; n-- > 0;) visit(n, traj.snapshot(n), traj.snapshot(n + 1));
    return;
  }
  const std::size_t stride = traj.stride();
  std::size_t last = m;
  while (last > 0) {
    const std::size_t first = ((last - 1) / stride) * stride;
    const auto states = replay(traj, first, last, controls, basis, options);
    for (std::size_t n = last; n-- > first;) visit(n, states[n - first], states[n - first + 1]);
    last = first;
  }
}

}  // namespace

double control_penalty(const ControlSchedule& controls, const FlowBasis& basis) {
  if (controls.modes() != basis.size()) throw ShapeError("control schedule and basis disagree on mode count");
  const auto w = basis.weights();
  std::vector<double> terms(controls.values().size());
  for (std::size_t n = 0; n < controls.steps(); ++n)
    for (std::size_t k = 0; k < controls.modes(); ++k) {
      const double u = controls(n, k);
      terms[n * controls.modes() + k] = w[k] * u * u;
    }
  return 0.5 * controls.grid().dt() * pairwise_sum(terms);
}

CostBreakdown evaluate_cost(const Trajectory& traj, const ControlSchedule& controls, const FlowBasis& basis,
                            const LengthParams& params) {
  check_shapes(traj, controls, basis);
  CostBreakdown c;
  c.length_term = -polyline_length(traj.terminal(), params);
  c.penalty_term = control_penalty(controls, basis);
  c.total = c.length_term + c.penalty_term;
  return c;
}

Vec2 adjoint_step(const Mat2& g, Vec2 p_next, double dt, const MidpointSolver& solver) {
  const Mat2 gt = transpose(g);
  if (solver.kind == MidpointSolver::Kind::Newton) {
    const Mat2 lhs = Mat2::identity() + (-0.5 * dt) * gt;
    const Vec2 rhs = p_next + (0.5 * dt) * (gt * p_next);
    return solve(lhs, rhs);
  }
  Vec2 p = p_next;
  for (int s = 0; s < kFixedPointSweeps; ++s) p = p_next + dt * (gt * midpoint(p, p_next));
  return p;
}

AdjointTrajectory backward_adjoint(const Trajectory& traj, const ControlSchedule& controls,
                                   const FlowBasis& basis, const LengthParams& params,
                                   const ForwardOptions& options) {
  const auto terminal = length_gradient(traj.terminal(), params);
  return backward_adjoint(traj, controls, basis, terminal, options);
}

AdjointTrajectory backward_adjoint(const Trajectory& traj, const ControlSchedule& controls,
                                   const FlowBasis& basis, std::span<const Vec2> terminal,
                                   const ForwardOptions& options) {
  check_shapes(traj, controls, basis);
  const std::size_t m = traj.grid().M;
  const double dt = traj.grid().dt();
  if (terminal.size() != traj.terminal().size()) throw ShapeError("terminal adjoint has the wrong marker count");
  AdjointTrajectory adj;
  adj.snapshots.resize(m + 1);
  adj.snapshots[m].assign(terminal.begin(), terminal.end());
  for_each_step_backward(traj, controls, basis, options, [&](std::size_t n, const MarkerSet& x0, const MarkerSet& x1) {
    const auto coeffs = controls.row(n);
    const auto& next = adj.snapshots[n + 1];
    auto& cur = adj.snapshots[n];
    cur.resize(next.size());
    parallel_for(next.size(), options.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        const Mat2 g = basis.combined_gradient(coeffs, midpoint(x0.positions[j], x1.positions[j]));
        cur[j] = adjoint_step(g, next[j], dt, options.solver);
      }
    });
  });
  return adj;
}

ControlSchedule assemble_gradient(const Trajectory& traj, const AdjointTrajectory& adjoint,
                                  const ControlSchedule& controls, const FlowBasis& basis,
                                  const ForwardOptions& options) {
  check_shapes(traj, controls, basis);
  const std::size_t m = traj.grid().M;
  const std::size_t nm = basis.size();
  const double dt = traj.grid().dt();
  if (adjoint.snapshots.size() != m + 1) throw ShapeError("adjoint trajectory has the wrong number of steps");
  const std::size_t np = traj.terminal().size();
  std::vector<double> grad(m * nm);
  std::vector<double> terms(nm * np);
  for_each_step_backward(traj, controls, basis, options, [&](std::size_t n, const MarkerSet& x0, const MarkerSet& x1) {
    const auto& p0 = adjoint.snapshots[n];
    const auto& p1 = adjoint.snapshots[n + 1];
    if (p0.size() != np || p1.size() != np) throw ShapeError("adjoint snapshot has the wrong marker count");
    parallel_for(np, options.threads, [&](std::size_t b, std::size_t e) {
      std::vector<Vec2> v(nm);
      for (std::size_t j = b; j < e; ++j) {
        basis.mode_velocities(midpoint(x0.positions[j], x1.positions[j]), v);
        const Vec2 pbar = midpoint(p0[j], p1[j]);
        for (std::size_t k = 0; k < nm; ++k) terms[k * np + j] = dot(pbar, v[k]);
      }
    });
    for (std::size_t k = 0; k < nm; ++k) {
      const double s = pairwise_sum(std::span<const double>(terms.data() + k * np, np));
      grad[n * nm + k] = basis.weights()[k] * dt * controls(n, k) + dt * s;
    }
  });
  return {controls.grid(), nm, std::move(grad)};
}

ControlSchedule adjoint_gradient(const Trajectory& traj, const ControlSchedule& controls, const FlowBasis& basis,
                                 const LengthParams& params, const ForwardOptions& options) {
  check_shapes(traj, controls, basis);
  const std::size_t m = traj.grid().M;
  const std::size_t nm = basis.size();
  const double dt = traj.grid().dt();
  std::vector<Vec2> p_next = length_gradient(traj.terminal(), params);
  const std::size_t np = p_next.size();
  std::vector<Vec2> p_cur(np);
  std::vector<double> grad(m * nm);
  std::vector<double> terms(nm * np);
  for_each_step_backward(traj, controls, basis, options, [&](std::size_t n, const MarkerSet& x0, const MarkerSet& x1) {
    const auto coeffs = controls.row(n);
    parallel_for(np, options.threads, [&](std::size_t b, std::size_t e) {
      std::vector<Vec2> v(nm);
      std::vector<Mat2> gk(nm);
      for (std::size_t j = b; j < e; ++j) {
        basis.mode_fields(midpoint(x0.positions[j], x1.positions[j]), v, gk);
        Mat2 g{};
        for (std::size_t k = 0; k < nm; ++k) g += coeffs[k] * gk[k];
        p_cur[j] = adjoint_step(g, p_next[j], dt, options.solver);
        const Vec2 pbar = midpoint(p_cur[j], p_next[j]);
        for (std::size_t k = 0; k < nm; ++k) terms[k * np + j] = dot(pbar, v[k]);
      }
    });
    for (std::size_t k = 0; k < nm; ++k) {
      const double s = pairwise_sum(std::span<const double>(terms.data() + k * np, np));
      grad[n * nm + k] = basis.weights()[k] * dt * controls(n, k) + dt * s;
    }
    std::swap(p_cur, p_next);
  });
  return {controls.grid(), nm, std::move(grad)};
}

}  // namespace stirring
