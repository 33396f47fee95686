#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stirring/basis.hpp"
#include "stirring/interface.hpp"

namespace stirring {

/// Uniform grid t_n = n T / M, n = 0..M.
struct TimeGrid {
  double T = 1.0;
  std::size_t M = 1;

  double dt() const noexcept { return T / static_cast<double>(M); }
  double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt(); }
  void validate() const;
  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Piecewise-constant controls u_{k,n} on [t_n, t_{n+1}), stored step-major.
class ControlSchedule {
 public:
  ControlSchedule() = default;
  ControlSchedule(TimeGrid grid, std::size_t modes, std::vector<double> values);

  static ControlSchedule zeros(TimeGrid grid, std::size_t modes);
  static ControlSchedule constant(TimeGrid grid, std::span<const double> per_mode);
  /// u_{k,n} = f(t_n, k).
  static ControlSchedule sampled(TimeGrid grid, std::size_t modes,
                                 const std::function<double(double, std::size_t)>& f);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t modes() const noexcept { return modes_; }
  std::size_t steps() const noexcept { return grid_.M; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> row(std::size_t n) const { return {values_.data() + n * modes_, modes_}; }
  double operator()(std::size_t n, std::size_t k) const { return values_[n * modes_ + k]; }
  double& operator()(std::size_t n, std::size_t k) { return values_[n * modes_ + k]; }

  /// sqrt(dt sum_{n,k} u_{k,n}^2).
  double l2_norm() const;

  friend bool operator==(const ControlSchedule&, const ControlSchedule&) = default;

 private:
  TimeGrid grid_{};
  std::size_t modes_ = 0;
  std::vector<double> values_;
};

/// How the implicit midpoint equation is solved per marker.
struct MidpointSolver {
  enum class Kind { Fixed5, Newton };
  Kind kind = Kind::Fixed5;
  /// Newton stops when the correction falls below this.
  double tol = 1e-14;
  int max_newton = 50;

  static MidpointSolver fixed5() { return {}; }
  static MidpointSolver newton(double tol = 1e-14) { return {Kind::Newton, tol, 50}; }
};

inline constexpr int kFixedPointSweeps = 5;

/// Markers that land outside the domain by at most this are projected back.
inline constexpr double kExitTolerance = 1e-9;

/// One implicit-midpoint step X' = X + dt sum_k u_k v_k((X + X')/2) for every
/// marker independently. Throws IntegrationError when a marker exits the
/// domain by more than kExitTolerance.
MarkerSet midpoint_step(const MarkerSet& markers, std::span<const double> coeffs, const FlowBasis& basis,
                        double dt, const MidpointSolver& solver = {}, std::size_t step_index = 0,
                        int threads = 1);

/// Single-marker version of midpoint_step without the domain check.
Vec2 midpoint_advance(Vec2 x, std::span<const double> coeffs, const FlowBasis& basis, double dt,
                      const MidpointSolver& solver);

struct ForwardOptions {
  MidpointSolver solver{};
  /// Keep every k-th snapshot (1 = dense). The terminal snapshot is always kept.
  std::size_t checkpoint_every = 1;
  int threads = 1;
};

/// Marker history X_0..X_M, densely or at checkpoints.
class Trajectory {
 public:
  Trajectory(TimeGrid grid, std::size_t stride);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t stride() const noexcept { return stride_; }
  bool dense() const noexcept { return stride_ == 1; }
  bool has_snapshot(std::size_t n) const noexcept;
  /// Throws std::out_of_range for a snapshot that was not stored.
  const MarkerSet& snapshot(std::size_t n) const;
  const MarkerSet& initial() const { return snapshot(0); }
  const MarkerSet& terminal() const { return snapshot(grid_.M); }
  std::size_t stored() const noexcept;

  void store(std::size_t n, MarkerSet markers);

 private:
  std::size_t slot(std::size_t n) const noexcept;

  TimeGrid grid_;
  std::size_t stride_;
  std::vector<MarkerSet> snapshots_;
  std::vector<bool> filled_;
};

using StepObserver = std::function<void(std::size_t n, const MarkerSet& markers)>;

/// Advances `initial` through all M control intervals. The observer, if any,
/// sees every time level n = 0..M.
Trajectory integrate(const MarkerSet& initial, const ControlSchedule& controls, const FlowBasis& basis,
                     const ForwardOptions& options = {}, const StepObserver& observer = {});

/// States X_first..X_last recomputed from the stored snapshot at `first`.
std::vector<MarkerSet> replay(const Trajectory& traj, std::size_t first, std::size_t last,
                              const ControlSchedule& controls, const FlowBasis& basis,
                              const ForwardOptions& options);

}  // namespace stirring
