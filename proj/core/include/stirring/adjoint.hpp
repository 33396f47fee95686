#pragma once

#include <span>
#include <vector>

#include "stirring/forward.hpp"

namespace stirring {

/// J_h = -L_{h,eps}(X_M) + (dt/2) sum_{n,k} gamma_k u_{k,n}^2.
struct CostBreakdown {
  double length_term = 0.0;   // -L_{h,eps}(X_M)
  double penalty_term = 0.0;  // (dt/2) sum gamma_k u^2
  double total = 0.0;
};

/// Diagonal-Gram control penalty (dt/2) sum_{n,k} gamma_k u_{k,n}^2.
double control_penalty(const ControlSchedule& controls, const FlowBasis& basis);

/// Throws ShapeError if the trajectory grid or mode count does not match.
CostBreakdown evaluate_cost(const Trajectory& traj, const ControlSchedule& controls, const FlowBasis& basis,
                            const LengthParams& params);

/// Discrete adjoint p_n^j for n = 0..M.
struct AdjointTrajectory {
  std::vector<std::vector<Vec2>> snapshots;
};

/// One backward step for one marker: solves
/// p_n = p_{n+1} + dt G^T (p_n + p_{n+1}) / 2
/// with 5 fixed-point sweeps from p_{n+1}, or exactly for the Newton solver.
Vec2 adjoint_step(const Mat2& g, Vec2 p_next, double dt, const MidpointSolver& solver);

/// Backward recursion from p_M = length_gradient(X_M).
AdjointTrajectory backward_adjoint(const Trajectory& traj, const ControlSchedule& controls,
                                   const FlowBasis& basis, const LengthParams& params,
                                   const ForwardOptions& options = {});

/// Backward recursion from an arbitrary terminal condition.
AdjointTrajectory backward_adjoint(const Trajectory& traj, const ControlSchedule& controls,
                                   const FlowBasis& basis, std::span<const Vec2> terminal,
                                   const ForwardOptions& options = {});

/// dJ_h/du_{k,n} = gamma_k dt u_{k,n}
///               + dt sum_j (p_n^j + p_{n+1}^j)/2 . v_k((X_n^j + X_{n+1}^j)/2),
/// returned in the step-major layout of ControlSchedule.
ControlSchedule assemble_gradient(const Trajectory& traj, const AdjointTrajectory& adjoint,
                                  const ControlSchedule& controls, const FlowBasis& basis,
                                  const ForwardOptions& options = {});

/// Backward sweep and gradient assembly fused, without storing p.
ControlSchedule adjoint_gradient(const Trajectory& traj, const ControlSchedule& controls, const FlowBasis& basis,
                                 const LengthParams& params, const ForwardOptions& options = {});

}  // namespace stirring
