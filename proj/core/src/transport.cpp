#include "stirring/transport.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "stirring/errors.hpp"
#include "stirring/parallel.hpp"

namespace stirring {

namespace {

constexpr double kPi = std::numbers::pi;

// Face-normal velocities on the staggered grid. ux[j * (n + 1) + i] sits on
// the x-face at x1 = i h between cells i-1 and i; uy[j * n + i] on the y-face
// at x2 = j h between cells j-1 and j.
struct FaceVelocity {
  std::vector<double> ux;
  std::vector<double> uy;
};

FaceVelocity mode_faces(const FlowBasis& basis, std::size_t k, std::size_t n) {
  const double h = 1.0 / static_cast<double>(n);
  std::vector<double> coeffs(basis.size(), 0.0);
  coeffs[k] = 1.0;
  std::vector<double> psi((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      psi[j * (n + 1) + i] = basis.stream_function(coeffs, {static_cast<double>(i) * h, static_cast<double>(j) * h});
  auto corner = [&](std::size_t i, std::size_t j) { return psi[j * (n + 1) + i]; };
  FaceVelocity f;
  f.ux.assign((n + 1) * n, 0.0);
  f.uy.assign(n * (n + 1), 0.0);
  // v = (-d psi / d x2, d psi / d x1); walls carry zero normal velocity.
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 1; i < n; ++i) f.ux[j * (n + 1) + i] = -(corner(i, j + 1) - corner(i, j)) / h;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) f.uy[j * n + i] = (corner(i + 1, j) - corner(i, j)) / h;
  return f;
}

double van_leer(double a, double b) {
  const double ab = a * b;
  return ab > 0.0 ? 2.0 * ab / (a + b) : 0.0;
}

class Stepper {
 public:
  Stepper(std::size_t n, int threads) : n_(n), threads_(threads), rhs_(n * n), stage_(n * n), fx_((n + 1) * n), fy_(n * (n + 1)) {}

  // One SSP-RK2 step of size dt with face velocities `v`.
  void step(std::vector<double>& theta, const FaceVelocity& v, double dt) {
    residual(theta, v);
    for (std::size_t c = 0; c < theta.size(); ++c) stage_[c] = theta[c] + dt * rhs_[c];
    residual(stage_, v);
    for (std::size_t c = 0; c < theta.size(); ++c) theta[c] = 0.5 * theta[c] + 0.5 * (stage_[c] + dt * rhs_[c]);
  }

 private:
  // rhs = -div(u theta) / h with limited upwind face values.
  void residual(const std::vector<double>& q, const FaceVelocity& v) {
    const std::size_t n = n_;
    const double inv_h = static_cast<double>(n);
    auto val = [&](std::size_t i, std::size_t j) { return q[j * n + i]; };
    auto slope_x = [&](std::size_t i, std::size_t j) {
      const double c = val(i, j);
      const double l = i > 0 ? val(i - 1, j) : c;
      const double r = i + 1 < n ? val(i + 1, j) : c;
      return van_leer(c - l, r - c);
    };
    auto slope_y = [&](std::size_t i, std::size_t j) {
      const double c = val(i, j);
      const double b = j > 0 ? val(i, j - 1) : c;
      const double t = j + 1 < n ? val(i, j + 1) : c;
      return van_leer(c - b, t - c);
    };
    parallel_for(n, threads_, [&](std::size_t jb, std::size_t je) {
      for (std::size_t j = jb; j < je; ++j) {
        for (std::size_t i = 1; i < n; ++i) {
          const double u = v.ux[j * (n + 1) + i];
          const double face = u > 0.0 ? val(i - 1, j) + 0.5 * slope_x(i - 1, j) : val(i, j) - 0.5 * slope_x(i, j);
          fx_[j * (n + 1) + i] = u * face;
        }
        fx_[j * (n + 1)] = 0.0;
        fx_[j * (n + 1) + n] = 0.0;
      }
    });
    parallel_for(n + 1, threads_, [&](std::size_t jb, std::size_t je) {
      for (std::size_t j = jb; j < je; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
          if (j == 0 || j == n) {
            fy_[j * n + i] = 0.0;
            continue;
          }
          const double u = v.uy[j * n + i];
          const double face = u > 0.0 ? val(i, j - 1) + 0.5 * slope_y(i, j - 1) : val(i, j) - 0.5 * slope_y(i, j);
          fy_[j * n + i] = u * face;
        }
      }
    });
    parallel_for(n, threads_, [&](std::size_t jb, std::size_t je) {
      for (std::size_t j = jb; j < je; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const double div = fx_[j * (n + 1) + i + 1] - fx_[j * (n + 1) + i] + fy_[(j + 1) * n + i] - fy_[j * n + i];
          rhs_[j * n + i] = -div * inv_h;
        }
    });
  }

  std::size_t n_;
  int threads_;
  std::vector<double> rhs_, stage_, fx_, fy_;
};

// Largest total outflow rate over all cells, in units of 1/time.
double max_outflow_rate(const FaceVelocity& v, std::size_t n) {
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double out = std::max(0.0, v.ux[j * (n + 1) + i + 1]) + std::max(0.0, -v.ux[j * (n + 1) + i]) +
                         std::max(0.0, v.uy[(j + 1) * n + i]) + std::max(0.0, -v.uy[j * n + i]);
      worst = std::max(worst, out);
    }
  return worst * static_cast<double>(n);
}

bool near(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

}  // namespace

double ScalarField::mass() const { return pairwise_sum(values) * h() * h(); }

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

ScalarField sample_field(std::size_t n, const std::function<double(double, double)>& f) {
  if (n < 2) throw std::invalid_argument("scalar grid needs at least 2 cells per side");
  ScalarField s{n, std::vector<double>(n * n)};
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) s.at(i, j) = f(s.center(i), s.center(j));
  return s;
}

ScalarField init_theta(std::size_t n) {
  return sample_field(n, [](double, double x2) { return std::tanh((x2 - 0.5) / 0.01); });
}

struct MixNormEvaluator::Plans {
  double* in = nullptr;
  double* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

MixNormEvaluator::MixNormEvaluator(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 2) throw std::invalid_argument("mix-norm grid needs at least 2 cells per side");
  const int ni = static_cast<int>(n);
  plans_->in = fftw_alloc_real(n * n);
  plans_->spec = fftw_alloc_real(n * n);
  // DCT-II forward and DCT-III backward; FFTW_ESTIMATE keeps plans deterministic.
  plans_->forward = fftw_plan_r2r_2d(ni, ni, plans_->in, plans_->spec, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_r2r_2d(ni, ni, plans_->spec, plans_->in, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FFTW planning failed");
}

MixNormEvaluator::~MixNormEvaluator() {
  if (!plans_) return;
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
  fftw_free(plans_->in);
  fftw_free(plans_->spec);
}

double MixNormEvaluator::operator()(const ScalarField& field) {
  if (field.n != n_) throw ShapeError("field size does not match the mix-norm evaluator");
  const std::size_t n = n_;
  const double mean = pairwise_sum(field.values) / static_cast<double>(n * n);
  std::vector<double> centered(n * n);
  for (std::size_t c = 0; c < n * n; ++c) centered[c] = field.values[c] - mean;
  std::copy(centered.begin(), centered.end(), plans_->in);
  fftw_execute(plans_->forward);
  // spec[q * n + p] multiplies cos(p pi x1) cos(q pi x2); eigenvalue pi^2 (p^2 + q^2).
  const double norm = 1.0 / (4.0 * static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t p = 0; p < n; ++p) {
      const double lam = kPi * kPi * static_cast<double>(p * p + q * q);
      plans_->spec[q * n + p] = lam > 0.0 ? plans_->spec[q * n + p] * norm / lam : 0.0;
    }
  fftw_execute(plans_->backward);
  const double h2 = 1.0 / static_cast<double>(n * n);
  std::vector<double> prod(n * n);
  for (std::size_t c = 0; c < n * n; ++c) prod[c] = centered[c] * plans_->in[c] * h2;
  return std::sqrt(std::max(0.0, pairwise_sum(prod)));
}

double mixnorm(const ScalarField& field) {
  MixNormEvaluator eval(field.n);
  return eval(field);
}

AdvectionResult advect(const ScalarField& field, const ControlSchedule& controls, const FlowBasis& basis,
                       const TransportOptions& options) {
  if (!std::holds_alternative<UnitSquare>(basis.domain()))
    throw std::invalid_argument("Eulerian transport is implemented on the unit square only");
  if (!basis.has_stream_function()) throw std::invalid_argument("transport needs a basis with a stream function");
  if (controls.modes() != basis.size()) throw ShapeError("control schedule and basis disagree on mode count");
  if (!(options.cfl > 0.0 && options.cfl <= 1.0)) throw std::invalid_argument("CFL number must lie in (0, 1]");
  const std::size_t n = field.n;
  if (n < 2 || field.values.size() != n * n) throw ShapeError("malformed scalar field");

  const TimeGrid grid = controls.grid();
  const double T = grid.T;
  for (double t : options.series_times)
    if (t < -1e-12 || t > T * (1 + 1e-12)) throw std::invalid_argument("series time outside the control horizon");
  for (double t : options.snapshot_times)
    if (t < -1e-12 || t > T * (1 + 1e-12)) throw std::invalid_argument("snapshot time outside the control horizon");

  std::vector<FaceVelocity> modes;
  modes.reserve(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) modes.push_back(mode_faces(basis, k, n));

  std::vector<double> breaks;
  for (std::size_t m = 0; m <= grid.M; ++m) breaks.push_back(grid.time(m));
  breaks.insert(breaks.end(), options.series_times.begin(), options.series_times.end());
  breaks.insert(breaks.end(), options.snapshot_times.begin(), options.snapshot_times.end());
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> uniq;
  for (double t : breaks)
    if (uniq.empty() || !near(uniq.back(), t, T)) uniq.push_back(t);

  AdvectionResult result;
  MixNormEvaluator mix(n);
  std::vector<double> theta = field.values;
  Stepper stepper(n, options.threads);
  ScalarField work{n, {}};

  auto record = [&](double t) {
    const bool in_series = std::any_of(options.series_times.begin(), options.series_times.end(),
                                       [&](double s) { return near(s, t, T); });
    const bool in_snap = std::any_of(options.snapshot_times.begin(), options.snapshot_times.end(),
                                     [&](double s) { return near(s, t, T); });
    if (!in_series && !in_snap) return;
    work.values = theta;
    if (in_series) {
      result.series.times.push_back(t);
      result.series.values.push_back(mix(work));
    }
    if (in_snap) {
      result.snapshot_times.push_back(t);
      result.snapshots.push_back(work);
    }
  };

  FaceVelocity vel{std::vector<double>((n + 1) * n), std::vector<double>(n * (n + 1))};
  std::size_t current_interval = grid.M;  // none yet
  double rate = 0.0;
  record(uniq.front());
  for (std::size_t b = 0; b + 1 < uniq.size(); ++b) {
    const double a = uniq[b];
    const double e = uniq[b + 1];
    const std::size_t interval =
        std::min<std::size_t>(grid.M - 1, static_cast<std::size_t>(std::floor(a / grid.dt() + 1e-9)));
    if (interval != current_interval) {
      current_interval = interval;
      const auto u = controls.row(interval);
      std::fill(vel.ux.begin(), vel.ux.end(), 0.0);
      std::fill(vel.uy.begin(), vel.uy.end(), 0.0);
      for (std::size_t k = 0; k < modes.size(); ++k) {
        if (u[k] == 0.0) continue;
        for (std::size_t c = 0; c < vel.ux.size(); ++c) vel.ux[c] += u[k] * modes[k].ux[c];
        for (std::size_t c = 0; c < vel.uy.size(); ++c) vel.uy[c] += u[k] * modes[k].uy[c];
      }
      rate = max_outflow_rate(vel, n);
    }
    const double span = e - a;
    std::size_t sub = 1;
    if (rate > 0.0) {
      const double want = std::ceil(span * rate / options.cfl - 1e-12);
      if (want > static_cast<double>(options.max_substeps))
        throw CflError(fmt::format("interval [{}, {}] needs {} substeps (cap {})", a, e, want, options.max_substeps));
      sub = std::max<std::size_t>(1, static_cast<std::size_t>(want));
    }
    if (rate > 0.0) {
      const double dt = span / static_cast<double>(sub);
      const double h2 = 1.0 / static_cast<double>(n * n);
      double before = pairwise_sum(theta) * h2;
      for (std::size_t s = 0; s < sub; ++s) {
        stepper.step(theta, vel, dt);
        const double after = pairwise_sum(theta) * h2;
        result.max_mass_change = std::max(result.max_mass_change, std::abs(after - before));
        before = after;
      }
      result.substeps += sub;
    }
    record(e);
  }
  result.final_field = ScalarField{n, theta};
  return result;
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t j = 0; j < field.n; ++j) {
    for (std::size_t i = 0; i < field.n; ++i) os << (i ? "," : "") << fmt::format("{:.9g}", field.at(i, j));
    os << '\n';
  }
}

void write_field_pgm(const std::filesystem::path& path, const ScalarField& field, double lo, double hi) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "P5\n" << field.n << ' ' << field.n << "\n255\n";
  // PGM rows run top to bottom, so the highest x2 row comes first.
  for (std::size_t r = 0; r < field.n; ++r) {
    const std::size_t j = field.n - 1 - r;
    for (std::size_t i = 0; i < field.n; ++i) {
      const double s = std::clamp((field.at(i, j) - lo) / (hi - lo), 0.0, 1.0);
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * s))));
    }
  }
}

}  // namespace stirring
