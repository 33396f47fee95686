#include "stirring/basis.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>
#include <stdexcept>

#include "stirring/errors.hpp"

namespace stirring {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDomainTol = 1e-9;
constexpr int kTableOrders = 32;

// tanh(r) / r and (tanh(r)/r)' / r.
double tanh_over_r(double r) {
  if (r < 1e-4) {
    const double r2 = r * r;
    return 1.0 + r2 * (-1.0 / 3.0 + r2 * (2.0 / 15.0 + r2 * (-17.0 / 315.0 + r2 * (62.0 / 2835.0))));
  }
  return std::tanh(r) / r;
}

double tanh_over_r_slope_over_r(double r) {
  if (r < 1e-2) {
    const double r2 = r * r;
    return -2.0 / 3.0 +
           r2 * (8.0 / 15.0 + r2 * (-102.0 / 315.0 + r2 * (496.0 / 2835.0 + r2 * (-13820.0 / 155925.0))));
  }
  const double c = std::cosh(r);
  return (r / (c * c) - std::tanh(r)) / (r * r * r);
}

double sech2(double r) {
  const double c = std::cosh(r);
  return 1.0 / (c * c);
}

// sin(k pi t), cos(k pi t) for k = 0..n by angle addition.
struct Harmonics {
  std::array<double, kTableOrders + 1> s{};
  std::array<double, kTableOrders + 1> c{};

  void fill(double t, int n) {
    s[0] = 0.0;
    c[0] = 1.0;
    if (n < 1) return;
    // Reflect about 1/2 so that both walls give exact zeros.
    const bool upper = t > 0.5;
    const double r = upper ? 1.0 - t : t;
    s[1] = std::sin(kPi * r);
    c[1] = upper ? -std::cos(kPi * r) : std::cos(kPi * r);
    for (int k = 2; k <= n; ++k) {
      s[k] = s[k - 1] * c[1] + c[k - 1] * s[1];
      c[k] = c[k - 1] * c[1] - s[k - 1] * s[1];
    }
  }
};

// sin and cos of k pi t, exact zeros of sin at t = 0 and t = 1.
std::pair<double, double> sincos_pi(int k, double t) {
  if (t <= 0.5) return {std::sin(k * kPi * t), std::cos(k * kPi * t)};
  const double a = k * kPi * (1.0 - t);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return {-sign * std::sin(a), sign * std::cos(a)};
}

struct SineEval {
  double sx, cx, sy, cy;
};

SineEval sine_terms(const Harmonics& hx, const Harmonics& hy, int k, Vec2 x) {
  if (k <= kTableOrders) return {hx.s[k], hx.c[k], hy.s[k], hy.c[k]};
  const auto [sx, cx] = sincos_pi(k, x.x);
  const auto [sy, cy] = sincos_pi(k, x.y);
  return {sx, cx, sy, cy};
}

// v = (-d_y h, d_x h) for h = sin(a x) sin(a y), a = k pi.
Vec2 sine_velocity(const SineEval& e, double a) {
  return {-a * e.sx * e.cy, a * e.cx * e.sy};
}

Mat2 sine_gradient(const SineEval& e, double a) {
  const double a2 = a * a;
  return {-a2 * e.cx * e.cy, a2 * e.sx * e.sy, -a2 * e.sx * e.sy, a2 * e.cx * e.cy};
}

struct VortexWeight {
  double w;            // g(r) C(r)
  double slope_over_r; // w'(r) / r
};

bool vortex_weight(const DoswellVortex& v, double r, VortexWeight& out) {
  if (v.cutoff && r >= v.radius) return false;
  const double g = doswell_profile(r);
  const double gs = doswell_profile_slope_over_r(r);
  if (!v.cutoff) {
    out = {g, gs};
    return true;
  }
  const double c = cutoff(r, v.radius);
  out = {g * c, gs * c + g * cutoff_slope_over_r(r, v.radius)};
  return true;
}

void vortex_fields(const DoswellMode& mode, Vec2 x, Vec2* vel, Mat2* grad) {
  Vec2 v{};
  Mat2 m{};
  for (const auto& vx : mode.vortices) {
    const Vec2 d = x - vx.center;
    VortexWeight w{};
    if (!vortex_weight(vx, norm(d), w)) continue;
    v += w.w * perp(d);
    if (grad) {
      // grad(w J d) = w J + (J d)(grad w)^T with grad w = (w'/r) d.
      const double a = w.slope_over_r * d.x * d.y;
      m += Mat2{-a, -w.w - w.slope_over_r * d.y * d.y, w.w + w.slope_over_r * d.x * d.x, a};
    }
  }
  *vel = v;
  if (grad) *grad = m;
}

void validate_mode(const Domain& domain, const FlowMode& mode) {
  if (const auto* s = std::get_if<SineProduct>(&mode)) {
    if (s->order < 1) throw std::invalid_argument("sine mode order must be positive");
    if (!std::holds_alternative<UnitSquare>(domain))
      throw std::invalid_argument("sine modes are defined on the unit square only");
    return;
  }
  const auto& d = std::get<DoswellMode>(mode);
  if (d.vortices.empty()) throw std::invalid_argument("Doswell mode needs at least one vortex");
  for (const auto& v : d.vortices) {
    if (!(v.radius > 0.0)) throw std::invalid_argument("vortex radius must be positive");
    if (v.cutoff) {
      // Support disc must sit inside the domain.
      bool inside = false;
      if (const auto* disc = std::get_if<Disc>(&domain)) {
        inside = norm(v.center - disc->center) + v.radius <= disc->radius + kDomainTol;
      } else {
        inside = v.center.x - v.radius >= -kDomainTol && v.center.x + v.radius <= 1.0 + kDomainTol &&
                 v.center.y - v.radius >= -kDomainTol && v.center.y + v.radius <= 1.0 + kDomainTol;
      }
      if (!inside) throw std::invalid_argument("cut-off vortex disc must lie inside the domain");
    } else {
      const auto* disc = std::get_if<Disc>(&domain);
      if (!disc || norm(disc->center - v.center) > kDomainTol)
        throw std::invalid_argument(
            "an uncut vortex is tangent only to a disc domain sharing its center");
    }
  }
}

}  // namespace

double doswell_profile(double r) {
  if (r < 0.0 || std::isnan(r)) throw std::invalid_argument("doswell_profile: negative radius");
  return kDoswellPeak * sech2(r) * tanh_over_r(r);
}

double doswell_profile_slope_over_r(double r) {
  if (r < 0.0 || std::isnan(r)) throw std::invalid_argument("doswell_profile: negative radius");
  const double q = tanh_over_r(r);
  return kDoswellPeak * sech2(r) * (-2.0 * q * q + tanh_over_r_slope_over_r(r));
}

double doswell_stream(double r) {
  const double t = std::tanh(r);
  return 0.5 * kDoswellPeak * t * t;
}

double cutoff(double r, double rc) {
  if (r >= rc) return 0.0;
  const double s = 1.0 - (r / rc) * (r / rc);
  return s * s * s;
}

double cutoff_slope_over_r(double r, double rc) {
  if (r >= rc) return 0.0;
  const double s = 1.0 - (r / rc) * (r / rc);
  return -6.0 * s * s / (rc * rc);
}

std::string describe(const FlowMode& mode) {
  std::ostringstream os;
  if (const auto* s = std::get_if<SineProduct>(&mode)) {
    os << "sin(" << s->order << " pi x1) sin(" << s->order << " pi x2)";
  } else {
    const auto& d = std::get<DoswellMode>(mode);
    os << "doswell[" << d.vortices.size() << " vortex" << (d.vortices.size() == 1 ? "" : "es") << "]";
  }
  return os.str();
}

FlowBasis::FlowBasis(Domain domain, std::vector<FlowMode> modes, std::vector<double> weights)
    : domain_(std::move(domain)), modes_(std::move(modes)), weights_(std::move(weights)) {
  if (modes_.empty()) throw std::invalid_argument("basis needs at least one mode");
  if (weights_.size() != modes_.size())
    throw std::invalid_argument("basis needs exactly one penalty weight per mode");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("penalty weights must be positive");
  }
  for (const auto& m : modes_) {
    validate_mode(domain_, m);
    if (const auto* s = std::get_if<SineProduct>(&m)) max_order_ = std::max(max_order_, s->order);
  }
}

FlowBasis FlowBasis::cellular(std::span<const int> orders, double weight) {
  std::vector<FlowMode> modes;
  for (int k : orders) modes.emplace_back(SineProduct{k});
  return FlowBasis(UnitSquare{}, std::move(modes), std::vector<double>(orders.size(), weight));
}

FlowBasis FlowBasis::doswell(std::vector<DoswellVortex> cluster, double weight) {
  const Disc disc{{0.5, 0.5}, 0.5};
  std::vector<FlowMode> modes;
  modes.emplace_back(DoswellMode{{DoswellVortex{disc.center, disc.radius, false}}});
  modes.emplace_back(DoswellMode{std::move(cluster)});
  return FlowBasis(disc, std::move(modes), {weight, weight});
}

std::vector<DoswellVortex> FlowBasis::default_cluster() {
  constexpr double offset = 0.25;
  constexpr double rc = 0.2;
  return {
      {{0.5 + offset, 0.5}, rc, true}, {{0.5 - offset, 0.5}, rc, true},
      {{0.5, 0.5 + offset}, rc, true}, {{0.5, 0.5 - offset}, rc, true},
      {{0.5, 0.5}, rc, true},
  };
}

void FlowBasis::check_coeffs(std::span<const double> coeffs) const {
  if (coeffs.size() != modes_.size())
    throw ShapeError("expected " + std::to_string(modes_.size()) + " coefficients, got " +
                     std::to_string(coeffs.size()));
}

void FlowBasis::check_point(Vec2 x) const {
  if (!contains(domain_, x, kDomainTol)) {
    std::ostringstream os;
    os << "point (" << x.x << ", " << x.y << ") lies outside the " << domain_name(domain_);
    throw DomainError(os.str());
  }
}

Vec2 FlowBasis::velocity(std::span<const double> coeffs, Vec2 x) const {
  check_coeffs(coeffs);
  check_point(x);
  return combined_velocity(coeffs, x);
}

Mat2 FlowBasis::velocity_gradient(std::span<const double> coeffs, Vec2 x) const {
  check_coeffs(coeffs);
  check_point(x);
  return combined_gradient(coeffs, x);
}

bool FlowBasis::has_stream_function() const noexcept {
  for (const auto& m : modes_) {
    if (const auto* d = std::get_if<DoswellMode>(&m)) {
      for (const auto& v : d->vortices)
        if (v.cutoff) return false;
    }
  }
  return true;
}

double FlowBasis::stream_function(std::span<const double> coeffs, Vec2 x) const {
  check_coeffs(coeffs);
  if (!has_stream_function())
    throw std::logic_error("stream function is not available for cut-off vortices");
  double psi = 0.0;
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    if (const auto* s = std::get_if<SineProduct>(&modes_[k])) {
      const double a = s->order * kPi;
      psi += coeffs[k] * std::sin(a * x.x) * std::sin(a * x.y);
    } else {
      for (const auto& v : std::get<DoswellMode>(modes_[k]).vortices)
        psi += coeffs[k] * doswell_stream(norm(x - v.center));
    }
  }
  return psi;
}

void FlowBasis::mode_velocities(Vec2 x, std::span<Vec2> out) const {
  Harmonics hx, hy;
  if (max_order_ > 0) {
    const int n = std::min(max_order_, kTableOrders);
    hx.fill(x.x, n);
    hy.fill(x.y, n);
  }
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    if (const auto* s = std::get_if<SineProduct>(&modes_[k])) {
      out[k] = sine_velocity(sine_terms(hx, hy, s->order, x), s->order * kPi);
    } else {
      vortex_fields(std::get<DoswellMode>(modes_[k]), x, &out[k], nullptr);
    }
  }
}

void FlowBasis::mode_fields(Vec2 x, std::span<Vec2> velocities, std::span<Mat2> gradients) const {
  Harmonics hx, hy;
  if (max_order_ > 0) {
    const int n = std::min(max_order_, kTableOrders);
    hx.fill(x.x, n);
    hy.fill(x.y, n);
  }
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    if (const auto* s = std::get_if<SineProduct>(&modes_[k])) {
      const SineEval e = sine_terms(hx, hy, s->order, x);
      velocities[k] = sine_velocity(e, s->order * kPi);
      gradients[k] = sine_gradient(e, s->order * kPi);
    } else {
      vortex_fields(std::get<DoswellMode>(modes_[k]), x, &velocities[k], &gradients[k]);
    }
  }
}

Vec2 FlowBasis::combined_velocity(std::span<const double> coeffs, Vec2 x) const {
  std::array<Vec2, 16> local;
  std::vector<Vec2> heap;
  std::span<Vec2> v = modes_.size() <= local.size()
                          ? std::span<Vec2>(local.data(), modes_.size())
                          : std::span<Vec2>((heap.resize(modes_.size()), heap));
  mode_velocities(x, v);
  Vec2 sum{};
  for (std::size_t k = 0; k < v.size(); ++k) sum += coeffs[k] * v[k];
  return sum;
}

Mat2 FlowBasis::combined_gradient(std::span<const double> coeffs, Vec2 x) const {
  std::array<Vec2, 16> lv;
  std::array<Mat2, 16> lg;
  std::vector<Vec2> hv;
  std::vector<Mat2> hg;
  const std::size_t n = modes_.size();
  std::span<Vec2> v = n <= lv.size() ? std::span<Vec2>(lv.data(), n) : std::span<Vec2>((hv.resize(n), hv));
  std::span<Mat2> g = n <= lg.size() ? std::span<Mat2>(lg.data(), n) : std::span<Mat2>((hg.resize(n), hg));
  mode_fields(x, v, g);
  Mat2 sum{};
  for (std::size_t k = 0; k < n; ++k) sum += coeffs[k] * g[k];
  return sum;
}

}  // namespace stirring
