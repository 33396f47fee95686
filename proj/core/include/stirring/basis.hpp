#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stirring/geometry.hpp"

namespace stirring {

/// Peak angular velocity of the Doswell vortex profile.
inline constexpr double kDoswellPeak = 2.59807;

/// Angular velocity profile g(r) = vbar sech^2(r) tanh(r) / r of a Doswell
/// vortex. Continuous at r = 0 with g(0) = vbar. Throws std::invalid_argument
/// for negative r.
double doswell_profile(double r);

/// g'(r) / r, which stays finite as r -> 0.
double doswell_profile_slope_over_r(double r);

/// Stream function of a single uncut vortex, psi(r) = vbar tanh(r)^2 / 2,
/// so that J grad psi = g(r) J (x - c).
double doswell_stream(double r);

/// Polynomial cutoff C(r) = (1 - (r/rc)^2)^3 on [0, rc), zero beyond.
/// C(rc) = C'(rc) = 0.
double cutoff(double r, double rc);

/// C'(r) / r.
double cutoff_slope_over_r(double r, double rc);

/// Cellular mode with stream function h(x) = sin(k pi x1) sin(k pi x2).
struct SineProduct {
  int order = 1;
};

/// One Doswell vortex. With cutoff enabled the vortex is multiplied by
/// cutoff(|x - center|, radius) and vanishes outside the disc.
struct DoswellVortex {
  Vec2 center{0.5, 0.5};
  double radius = 0.5;
  bool cutoff = false;
};

/// A superposition of Doswell vortices acting as one basis mode. A single
/// uncut vortex is the classic frontogenesis field; several cut vortices form
/// a multi-cell stirrer.
struct DoswellMode {
  std::vector<DoswellVortex> vortices;
};

using FlowMode = std::variant<SineProduct, DoswellMode>;

std::string describe(const FlowMode& mode);

/// Finite family of divergence-free velocity modes v_k = J grad h_k on a
/// fixed domain, with per-mode penalty weights. Immutable after
/// construction; all member functions are safe to call concurrently.
class FlowBasis {
 public:
  FlowBasis(Domain domain, std::vector<FlowMode> modes, std::vector<double> weights);

  /// Cellular basis on the unit square with orders `orders` and a common weight.
  static FlowBasis cellular(std::span<const int> orders, double weight);

  /// Two-mode Doswell basis on the disc of radius 0.5 around (0.5, 0.5): the
  /// uncut central vortex, then `cluster` (cut vortices) as the second mode.
  static FlowBasis doswell(std::vector<DoswellVortex> cluster, double weight);

  /// Default five-vortex cluster: four peripheral vortices at distance 0.25
  /// from the disc center plus one central vortex, all of cutoff radius 0.2.
  static std::vector<DoswellVortex> default_cluster();

  std::size_t size() const noexcept { return modes_.size(); }
  const Domain& domain() const noexcept { return domain_; }
  std::span<const FlowMode> modes() const noexcept { return modes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// sum_k coeffs[k] v_k(x). Throws DomainError if x is outside the domain.
  Vec2 velocity(std::span<const double> coeffs, Vec2 x) const;

  /// Exact Jacobian of velocity(); entry (i, j) = d v_i / d x_j.
  Mat2 velocity_gradient(std::span<const double> coeffs, Vec2 x) const;

  /// Stream function sum_k coeffs[k] h_k(x). Only available for sine modes
  /// and uncut vortices; throws std::logic_error otherwise.
  double stream_function(std::span<const double> coeffs, Vec2 x) const;
  bool has_stream_function() const noexcept;

  /// Per-mode velocities at x, without a domain check. `out` has size().
  void mode_velocities(Vec2 x, std::span<Vec2> out) const;

  /// Per-mode velocities and gradients at x, without a domain check.
  void mode_fields(Vec2 x, std::span<Vec2> velocities, std::span<Mat2> gradients) const;

  /// Combined field, unchecked; used by the solvers in their inner loops.
  Vec2 combined_velocity(std::span<const double> coeffs, Vec2 x) const;
  Mat2 combined_gradient(std::span<const double> coeffs, Vec2 x) const;

 private:
  void check_coeffs(std::span<const double> coeffs) const;
  void check_point(Vec2 x) const;

  Domain domain_;
  std::vector<FlowMode> modes_;
  std::vector<double> weights_;
  int max_order_ = 0;
};

}  // namespace stirring
