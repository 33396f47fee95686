#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "stirring/forward.hpp"

namespace stirring {

/// Cell averages on an n x n grid over the unit square, x1 fastest:
/// values[j * n + i] is the cell centered at ((i + 1/2) h, (j + 1/2) h).
struct ScalarField {
  std::size_t n = 0;
  std::vector<double> values;

  double h() const noexcept { return 1.0 / static_cast<double>(n); }
  double center(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * h(); }
  double& at(std::size_t i, std::size_t j) { return values[j * n + i]; }
  double at(std::size_t i, std::size_t j) const { return values[j * n + i]; }
  /// sum theta h^2.
  double mass() const;
  double min() const;
  double max() const;
};

/// Cell-center samples of f(x1, x2).
ScalarField sample_field(std::size_t n, const std::function<double(double, double)>& f);

/// theta0 = tanh((x2 - 0.5) / 0.01) at cell centers.
ScalarField init_theta(std::size_t n);

/// Homogeneous H^{-1} norm with Neumann boundary conditions: removes the
/// mean, solves -Lap(phi) = theta' in the cosine basis and returns
/// sqrt(sum theta' phi h^2). Keeps FFTW plans for one grid size.
class MixNormEvaluator {
 public:
  explicit MixNormEvaluator(std::size_t n);
  ~MixNormEvaluator();
  MixNormEvaluator(const MixNormEvaluator&) = delete;
  MixNormEvaluator& operator=(const MixNormEvaluator&) = delete;

  double operator()(const ScalarField& field);

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

double mixnorm(const ScalarField& field);

struct MixNormSeries {
  std::vector<double> times;
  std::vector<double> values;
};

struct TransportOptions {
  double cfl = 0.5;
  /// Upper bound on substeps within one control interval.
  std::size_t max_substeps = 1'000'000;
  /// Times at which the mix-norm is recorded.
  std::vector<double> series_times;
  /// Times at which the full field is kept.
  std::vector<double> snapshot_times;
  int threads = 1;
};

struct AdvectionResult {
  std::vector<double> snapshot_times;
  std::vector<ScalarField> snapshots;
  MixNormSeries series;
  ScalarField final_field;
  std::size_t substeps = 0;
  /// Largest |mass change| over any single substep.
  double max_mass_change = 0.0;
};

/// Conservative finite-volume transport of theta under the controlled
/// velocity: MUSCL reconstruction with the van Leer limiter, upwind fluxes
/// and two-stage SSP Runge-Kutta, with face velocities taken from stream
/// function differences so the discrete divergence vanishes. Requires a basis
/// on the unit square with a stream function. Throws CflError if an interval
/// would need more than max_substeps.
AdvectionResult advect(const ScalarField& field, const ControlSchedule& controls, const FlowBasis& basis,
                       const TransportOptions& options);

/// CSV grid, one row per x2 index, and an 8-bit PGM image scaled to [lo, hi].
void write_field_csv(const std::filesystem::path& path, const ScalarField& field);
void write_field_pgm(const std::filesystem::path& path, const ScalarField& field, double lo = -1.0,
                     double hi = 1.0);

}  // namespace stirring
