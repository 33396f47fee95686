#include "stirring/forward.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stirring/errors.hpp"
#include "stirring/parallel.hpp"

namespace stirring {

void TimeGrid::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("time horizon must be positive");
  if (M < 1) throw std::invalid_argument("time grid needs at least one step");
}

ControlSchedule::ControlSchedule(TimeGrid grid, std::size_t modes, std::vector<double> values)
    : grid_(grid), modes_(modes), values_(std::move(values)) {
  grid_.validate();
  if (modes_ == 0) throw std::invalid_argument("control schedule needs at least one mode");
  if (values_.size() != grid_.M * modes_)
    throw ShapeError("control schedule expects " + std::to_string(grid_.M * modes_) + " values, got " +
                     std::to_string(values_.size()));
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("control values must be finite");
  }
}

ControlSchedule ControlSchedule::zeros(TimeGrid grid, std::size_t modes) {
  return {grid, modes, std::vector<double>(grid.M * modes, 0.0)};
}

ControlSchedule ControlSchedule::constant(TimeGrid grid, std::span<const double> per_mode) {
  std::vector<double> v;
  v.reserve(grid.M * per_mode.size());
  for (std::size_t n = 0; n < grid.M; ++n) v.insert(v.end(), per_mode.begin(), per_mode.end());
  return {grid, per_mode.size(), std::move(v)};
}

ControlSchedule ControlSchedule::sampled(TimeGrid grid, std::size_t modes,
                                         const std::function<double(double, std::size_t)>& f) {
  std::vector<double> v(grid.M * modes);
  for (std::size_t n = 0; n < grid.M; ++n)
    for (std::size_t k = 0; k < modes; ++k) v[n * modes + k] = f(grid.time(n), k);
  return {grid, modes, std::move(v)};
}

double ControlSchedule::l2_norm() const {
  std::vector<double> sq(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) sq[i] = values_[i] * values_[i];
  return std::sqrt(grid_.dt() * pairwise_sum(sq));
}

Vec2 midpoint_advance(Vec2 x, std::span<const double> coeffs, const FlowBasis& basis, double dt,
                      const MidpointSolver& solver) {
  Vec2 y = x + dt * basis.combined_velocity(coeffs, x);
  if (solver.kind == MidpointSolver::Kind::Fixed5) {
    for (int s = 0; s < kFixedPointSweeps; ++s) y = x + dt * basis.combined_velocity(coeffs, midpoint(x, y));
    return y;
  }
  for (int it = 0; it < solver.max_newton; ++it) {
    const Vec2 m = midpoint(x, y);
    const Vec2 r = y - x - dt * basis.combined_velocity(coeffs, m);
    const Mat2 jac = Mat2::identity() + (-0.5 * dt) * basis.combined_gradient(coeffs, m);
    const Vec2 delta = solve(jac, r);
    y -= delta;
    if (norm(delta) <= solver.tol) break;
  }
  return y;
}

MarkerSet midpoint_step(const MarkerSet& markers, std::span<const double> coeffs, const FlowBasis& basis,
                        double dt, const MidpointSolver& solver, std::size_t step_index, int threads) {
  if (coeffs.size() != basis.size()) throw ShapeError("coefficient count does not match the basis");
  MarkerSet out;
  out.positions.resize(markers.size());
  const Domain& domain = basis.domain();
  parallel_for(markers.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      Vec2 y = midpoint_advance(markers.positions[j], coeffs, basis, dt, solver);
      const double excess = exit_distance(domain, y);
      if (excess > 0.0) {
        if (excess > kExitTolerance || !std::isfinite(excess)) throw IntegrationError(step_index, j, excess);
        y = project_into(domain, y);
      }
      out.positions[j] = y;
    }
  });
  return out;
}

Trajectory::Trajectory(TimeGrid grid, std::size_t stride) : grid_(grid), stride_(stride) {
  grid_.validate();
  if (stride_ < 1) throw std::invalid_argument("checkpoint stride must be at least 1");
  const std::size_t slots = grid_.M / stride_ + 2;
  snapshots_.resize(slots);
  filled_.assign(slots, false);
}

std::size_t Trajectory::slot(std::size_t n) const noexcept {
  if (n == grid_.M) return snapshots_.size() - 1;
  return n / stride_;
}

bool Trajectory::has_snapshot(std::size_t n) const noexcept {
  if (n > grid_.M) return false;
  if (n != grid_.M && n % stride_ != 0) return false;
  return filled_[slot(n)];
}

const MarkerSet& Trajectory::snapshot(std::size_t n) const {
  if (!has_snapshot(n)) throw std::out_of_range("missing trajectory snapshot " + std::to_string(n));
  return snapshots_[slot(n)];
}

std::size_t Trajectory::stored() const noexcept {
  std::size_t c = 0;
  for (bool f : filled_) c += f ? 1 : 0;
  return c;
}

void Trajectory::store(std::size_t n, MarkerSet markers) {
  if (n > grid_.M || (n != grid_.M && n % stride_ != 0))
    throw std::out_of_range("snapshot " + std::to_string(n) + " is not a checkpoint");
  snapshots_[slot(n)] = std::move(markers);
  filled_[slot(n)] = true;
}

Trajectory integrate(const MarkerSet& initial, const ControlSchedule& controls, const FlowBasis& basis,
                     const ForwardOptions& options, const StepObserver& observer) {
  if (controls.modes() != basis.size()) throw ShapeError("control schedule and basis disagree on mode count");
  const TimeGrid& grid = controls.grid();
  Trajectory traj(grid, options.checkpoint_every);
  const double dt = grid.dt();
  MarkerSet current = initial;
  if (observer) observer(0, current);
  traj.store(0, current);
  for (std::size_t n = 0; n < grid.M; ++n) {
    current = midpoint_step(current, controls.row(n), basis, dt, options.solver, n, options.threads);
    if (observer) observer(n + 1, current);
    if (n + 1 == grid.M || (n + 1) % options.checkpoint_every == 0) traj.store(n + 1, current);
  }
  return traj;
}

std::vector<MarkerSet> replay(const Trajectory& traj, std::size_t first, std::size_t last,
                              const ControlSchedule& controls, const FlowBasis& basis,
                              const ForwardOptions& options) {
  if (last < first || last > traj.grid().M) throw std::out_of_range("invalid replay window");
  std::vector<MarkerSet> states;
  states.reserve(last - first + 1);
  states.push_back(traj.snapshot(first));
  const double dt = traj.grid().dt();
  for (std::size_t n = first; n < last; ++n) {
    if (traj.has_snapshot(n + 1) && traj.dense()) {
      states.push_back(traj.snapshot(n + 1));
    } else {
      states.push_back(midpoint_step(states.back(), controls.row(n), basis, dt, options.solver, n, options.threads));
    }
  }
  return states;
}

}  // namespace stirring
