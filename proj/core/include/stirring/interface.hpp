#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "stirring/geometry.hpp"

namespace stirring {

/// Ordered interface markers X^1..X^Np along an open polyline.
struct MarkerSet {
  std::vector<Vec2> positions;

  std::size_t size() const noexcept { return positions.size(); }
  std::span<const Vec2> view() const noexcept { return positions; }
  friend bool operator==(const MarkerSet&, const MarkerSet&) = default;
};

/// Smoothing length of l_eps(z) = sqrt(|z|^2 + eps^2).
struct LengthParams {
  double epsilon = 1e-8;
};

/// Horizontal chord {x2 = y0} clipped to the domain.
struct HorizontalLine {
  double y0 = 0.5;
};

/// Markers spaced uniformly in arc length along `curve`. Throws
/// std::invalid_argument if np < 2 or the line misses the domain.
MarkerSet init_interface(const Domain& domain, HorizontalLine curve, std::size_t np);

/// l_eps(z).
inline double regularized_norm(Vec2 z, double epsilon) {
  return std::sqrt(z.x * z.x + z.y * z.y + epsilon * epsilon);
}

/// Sum of regularized chord lengths. Pairwise summation over chords.
double polyline_length(std::span<const Vec2> markers, const LengthParams& params = {});
inline double polyline_length(const MarkerSet& m, const LengthParams& params = {}) {
  return polyline_length(m.view(), params);
}

/// p^j = -dL/dX^j in terms of regularized unit tangents tau^j:
/// p^1 = tau^1, p^Np = -tau^{Np-1}, p^j = tau^j - tau^{j-1}.
std::vector<Vec2> length_gradient(std::span<const Vec2> markers, const LengthParams& params = {});
inline std::vector<Vec2> length_gradient(const MarkerSet& m, const LengthParams& params = {}) {
  return length_gradient(m.view(), params);
}

/// CSV with header `j,x1,x2`, j counted from 1.
void write_markers_csv(const std::filesystem::path& path, std::span<const Vec2> markers);
MarkerSet read_markers_csv(const std::filesystem::path& path);

}  // namespace stirring
