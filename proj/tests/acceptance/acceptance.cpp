// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include <stirring/stirring.hpp>
#include <stirring_cli/config.hpp>

#include "precise_cost.hpp"

using namespace stirring;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::string only;

void run(const std::string& name, const std::function<Outcome()>& check) {
  if (!only.empty() && name.find(only) == std::string::npos) return;
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, fmt::format("threw: {}", e.what())};
  }
  if (!o.pass) ++failures;
  fmt::print("{} {}: {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", name, o.detail, seconds_since(t0));
  std::fflush(stdout);
}

const char* verdict(bool ok) { return ok ? "ok" : "FAILED"; }

double max_rel_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / scale;
}

ControlSchedule random_controls(TimeGrid grid, std::size_t modes, double amplitude, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amplitude, amplitude);
  return ControlSchedule::sampled(grid, modes, [&](double, std::size_t) { return U(rng); });
}

// Central differences of J_h in double precision. A perturbation of step n
// only affects steps n.., so each pair of runs restarts from the stored X_n.
std::vector<double> fd_gradient(const ControlProblem& p, const ControlSchedule& u, const Trajectory& traj,
                                double h) {
  const double dt = p.grid.dt();
  const std::size_t modes = u.modes();
  std::vector<double> out(u.values().size());
  ControlSchedule w = u;
  auto cost_from = [&](std::size_t first) {
    MarkerSet x = traj.snapshot(first);
    for (std::size_t n = first; n < p.grid.M; ++n) x = midpoint_step(x, w.row(n), p.basis, dt, p.forward.solver, n);
    return -polyline_length(x, p.length) + control_penalty(w, p.basis);
  };
  for (std::size_t n = 0; n < p.grid.M; ++n) {
    for (std::size_t k = 0; k < modes; ++k) {
      double& slot = w.values()[n * modes + k];
      const double keep = slot;
      slot = keep + h;
      const double jp = cost_from(n);
      slot = keep - h;
      const double jm = cost_from(n);
      slot = keep;
      out[n * modes + k] = (jp - jm) / (2.0 * h);
    }
  }
  return out;
}

Outcome gradient_exactness() {
  const auto t0 = Clock::now();
  const auto cfg = cli::preset("gradcheck");
  double worst_fixed = 0.0, worst_newton = 0.0, oracle_time = 0.0;
  for (std::size_t i = 0; i < cfg.gradcheck.instances; ++i) {
    const auto seed = static_cast<unsigned>(cfg.gradcheck.seed + i);
    ControlProblem p = cfg.problem();
    const auto u = project_ball(random_controls(p.grid, p.basis.size(), cfg.gradcheck.amplitude, seed),
                                cfg.optimizer.ball_radius);

    p.forward.solver = MidpointSolver::fixed5();
    const auto ev = evaluate(p, u);
    const auto g = adjoint_gradient(ev.trajectory, u, p.basis, p.length, p.forward);
    worst_fixed = std::max(worst_fixed, max_rel_error(g.values(), fd_gradient(p, u, ev.trajectory, 1e-6)));

    p.forward.solver = MidpointSolver::newton(1e-14);
    const auto evn = evaluate(p, u);
    const auto gn = adjoint_gradient(evn.trajectory, u, p.basis, p.length, p.forward);
    const auto t1 = Clock::now();
    oracle::PreciseCost precise({cfg.basis.orders, cfg.gamma, cfg.markers, cfg.horizon, cfg.steps, cfg.epsilon, true});
    worst_newton = std::max(worst_newton, max_rel_error(gn.values(), precise.fd_gradient(u.values(), 1e-6)));
    oracle_time += seconds_since(t1);
  }
  // The long-double oracle is test machinery, so it is not part of the budget.
  const double elapsed = seconds_since(t0) - oracle_time;
  const bool ok = worst_fixed <= 1e-5 && worst_newton <= 1e-8 && elapsed < 60.0;
  return {ok, fmt::format("{} instances, Np={} M={}; fixed5 max rel err {:.2e} (<= 1e-5 {}), newton {:.2e} "
                          "(<= 1e-8 {}), runtime {:.1f} s (< 60 s) excluding oracle {:.1f} s",
                          cfg.gradcheck.instances, cfg.markers, cfg.steps, worst_fixed, verdict(worst_fixed <= 1e-5),
                          worst_newton, verdict(worst_newton <= 1e-8), elapsed, oracle_time)};
}

double stream_drift(const MidpointSolver& solver) {
  const int order[] = {1};
  const auto b = FlowBasis::cellular(order, 1.0);
  const double c[] = {1.0};
  Vec2 x{0.3, 0.4};
  const double h0 = b.stream_function(c, x);
  double drift = 0.0;
  for (int n = 0; n < 5000; ++n) {
    x = midpoint_advance(x, c, b, 1e-3, solver);
    drift = std::max(drift, std::abs(b.stream_function(c, x) - h0));
  }
  return drift;
}

Outcome symplectic_conservation() {
  const double newton = stream_drift(MidpointSolver::newton(1e-14));
  const double fixed = stream_drift(MidpointSolver::fixed5());
  return {newton <= 1e-6 && fixed <= 1e-4,
          fmt::format("max |h(X_n) - h(X_0)| over 5000 steps: newton {:.2e} (<= 1e-6), fixed5 {:.2e} (<= 1e-4)",
                      newton, fixed)};
}

Outcome second_order() {
  const int order[] = {1};
  const auto b = FlowBasis::cellular(order, 1.0);
  const auto markers = init_interface(UnitSquare{}, {0.3}, 9);
  const double c[] = {1.0};
  auto terminal = [&](std::size_t M) {
    ForwardOptions o;
    o.solver = MidpointSolver::newton(1e-15);
    o.checkpoint_every = M;
    return integrate(markers, ControlSchedule::constant({1.0, M}, c), b, o).terminal();
  };
  const std::size_t base = 40;
  const auto ref = terminal(base * 8 * 16);
  std::vector<double> err;
  for (std::size_t M = base; M <= base * 8; M *= 2) {
    const auto x = terminal(M);
    double e = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) e = std::max(e, norm(x.positions[j] - ref.positions[j]));
    err.push_back(e);
  }
  bool ok = true;
  std::string ratios;
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double r = err[i] / err[i + 1];
    ok = ok && r >= 3.5 && r <= 4.5;
    ratios += fmt::format("{}{:.3f}", i ? ", " : "", r);
  }
  return {ok, fmt::format("errors {:.2e} .. {:.2e}; ratios per halving [{}] (in [3.5, 4.5])", err.front(), err.back(),
                          ratios)};
}

Outcome mixnorm_oracle() {
  const auto f = sample_field(256, [](double x1, double) { return std::cos(std::numbers::pi * x1); });
  const double m = mixnorm(f);
  const double expected = 1.0 / (std::numbers::pi * std::sqrt(2.0));
  return {std::abs(m - expected) <= 1e-3, fmt::format("{:.6f} vs {:.6f}, |diff| {:.2e} (<= 1e-3)", m, expected,
                                                      std::abs(m - expected))};
}

std::vector<double> sample_times(double T, std::size_t n) {
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t[i] = T * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

struct LengthSeries {
  std::vector<double> t, v;
};

LengthSeries length_series(const ControlProblem& p, const ControlSchedule& u) {
  LengthSeries s;
  ForwardOptions o = p.forward;
  o.checkpoint_every = p.grid.M;
  integrate(p.initial, u, p.basis, o, [&](std::size_t n, const MarkerSet& m) {
    s.t.push_back(p.grid.time(n));
    s.v.push_back(polyline_length(m, p.length));
  });
  return s;
}

MixNormSeries mixnorm_series(const cli::ExperimentConfig& cfg, const ControlSchedule& u) {
  TransportOptions o;
  o.cfl = cfg.transport.cfl;
  o.series_times = sample_times(cfg.horizon, cfg.transport.series_samples);
  return advect(init_theta(cfg.transport.cells), u, cfg.make_basis(), o).series;
}

ControlSchedule stationary_controls(const cli::ExperimentConfig& cfg) {
  std::vector<double> c(cfg.modes(), 0.0);
  c[0] = 1.0;
  return ControlSchedule::constant(cfg.grid(), c);
}

Outcome stationary_regime() {
  const auto cfg = cli::preset("cellular-stationary");
  const auto p = cfg.problem();
  const auto u = cfg.initial_guess();
  const auto len = length_series(p, u);
  const auto lin = fit_linear(len.t, len.v);
  const auto mix = mixnorm_series(cfg, u);
  const FitWindow w{1.0, 5.0};
  const auto pw = fit_power_law(mix.times, mix.values, w);
  const auto ex = fit_exponential(mix.times, mix.values, w);
  const bool poly = classify_decay(mix.times, mix.values, w) == DecayClass::Polynomial;

  auto fine = cfg;
  fine.markers = 100'000;
  const auto fine_len = length_series(fine.problem(), u);
  const double fine_r2 = fit_linear(fine_len.t, fine_len.v).r2;

  return {lin.r2 > 0.99 && poly,
          fmt::format("Np={} M={} Ncell={}: length linear r2 {:.5f} (> 0.99 {}); mix-norm on [1,5] power-law r2 "
                      "{:.4f} vs exponential r2 {:.4f} ({}); diagnostic at Np=1e5: length linear r2 {:.5f}",
                      cfg.markers, cfg.steps, cfg.transport.cells, lin.r2, verdict(lin.r2 > 0.99), pw.r2, ex.r2,
                      poly ? "polynomial" : "exponential", fine_r2)};
}

struct OptimizedRun {
  cli::ExperimentConfig cfg;
  OptimizationReport report;
  double initial_length = 0.0;
  double terminal_length = 0.0;
  double mix_rate = 0.0;
  double mix_r2 = 0.0;
  double stationary_rate = 0.0;
  double length_r2_linear = 0.0;
  double length_r2_exponential = 0.0;
  double seconds = 0.0;
};

OptimizedRun optimize_and_validate(cli::ExperimentConfig cfg) {
  const auto t0 = Clock::now();
  OptimizedRun r;
  const auto p = cfg.problem();
  r.report = optimize(p, cfg.initial_guess(), cfg.optimizer);
  r.initial_length = polyline_length(p.initial, p.length);
  r.terminal_length = -r.report.final_cost.length_term;
  if (cfg.transport.cells > 0) {
    const auto mix = mixnorm_series(cfg, r.report.final_controls);
    const auto fit = fit_exponential(mix.times, mix.values);
    r.mix_rate = fit.slope < 0.0 ? fit.rate : 0.0;
    r.mix_r2 = fit.r2;
    const auto ref = mixnorm_series(cfg, stationary_controls(cfg));
    const auto ref_fit = fit_exponential(ref.times, ref.values);
    r.stationary_rate = ref_fit.slope < 0.0 ? ref_fit.rate : 0.0;
  }
  const auto len = length_series(p, r.report.final_controls);
  r.length_r2_linear = fit_linear(len.t, len.v).r2;
  r.length_r2_exponential = fit_exponential(len.t, len.v).r2;
  r.seconds = seconds_since(t0);
  r.cfg = std::move(cfg);
  return r;
}

double ball_ratio(const OptimizedRun& r) { return r.report.per_iteration.back().ball_ratio; }

OptimizedRun& cellular_run() {
  static OptimizedRun r = optimize_and_validate(cli::preset("cellular-const"));
  return r;
}

Outcome optimized_cellular() {
  const auto& r = cellular_run();
  const double ratio = ball_ratio(r);
  const double rate_ratio = r.stationary_rate > 0.0 ? r.mix_rate / r.stationary_rate : 0.0;
  const bool grows_exp = r.length_r2_exponential > r.length_r2_linear;
  const bool ok = r.report.converged && ratio < 0.3 && rate_ratio >= 3.0 && grows_exp && r.seconds < 1800.0;
  return {ok, fmt::format("{} after {} iterations ({}); ballRatio {:.3f} (< 0.3 {}); L {:.2f} -> {:.2f}; "
                          "mix-norm exponential rate {:.3f} (r2 {:.3f}) vs stationary {:.3f}: ratio {:.2f} "
                          "(>= 3 {}); length r2 exponential {:.4f} vs linear {:.4f} ({}); runtime {:.0f} s (< 1800 s)",
                          r.report.converged ? "converged" : "not converged", r.report.iterations,
                          r.report.diagnostic, ratio, verdict(ratio < 0.3), r.initial_length, r.terminal_length,
                          r.mix_rate, r.mix_r2, r.stationary_rate, rate_ratio, verdict(rate_ratio >= 3.0),
                          r.length_r2_exponential, r.length_r2_linear, grows_exp ? "exponential" : "linear",
                          r.seconds)};
}

Outcome ball_activity() {
  const double cellular = ball_ratio(cellular_run());
  auto cfg = cli::preset("doswell-const");
  cfg.optimizer.max_iters = 20;
  const auto p = cfg.problem();
  const auto report = optimize(p, cfg.initial_guess(), cfg.optimizer);
  const double doswell = report.per_iteration.back().ball_ratio;
  const bool ok = cellular < 0.3 && std::abs(doswell - 1.0) <= 0.02;
  return {ok, fmt::format("cellular ballRatio {:.3f} (< 0.3 {}); Doswell ballRatio {:.4f} after {} iterations "
                          "(1.00 +- 0.02 {})",
                          cellular, verdict(cellular < 0.3), doswell, report.iterations,
                          verdict(std::abs(doswell - 1.0) <= 0.02))};
}

Outcome n4_study() {
  const auto& r2 = cellular_run();
  const auto r4 = optimize_and_validate(cli::preset("cellular-n4"));
  const double length_ratio = r4.terminal_length / r2.terminal_length;
  const double rate_ratio = r2.mix_rate > 0.0 ? r4.mix_rate / r2.mix_rate : 0.0;
  const bool longer = r4.terminal_length > r2.terminal_length;
  const bool gap = rate_ratio > 0.0 && length_ratio / rate_ratio > 2.0;
  return {longer && gap,
          fmt::format("L4 {:.2f} vs L2 {:.2f} ({}); N=4 {} after {} iterations; mix-norm rate N=4 {:.3f} vs N=2 "
                      "{:.3f}; length ratio / rate ratio {} (> 2 {})",
                      r4.terminal_length, r2.terminal_length, verdict(longer),
                      r4.report.converged ? "converged" : "stopped", r4.report.iterations, r4.mix_rate, r2.mix_rate,
                      rate_ratio > 0.0 ? fmt::format("{:.2f}", length_ratio / rate_ratio) : std::string("undefined"),
                      verdict(gap))};
}

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

Outcome cost_scaling() {
  const int orders[] = {1, 2};
  const auto b = FlowBasis::cellular(orders, 1e-5);
  const double c[] = {0.5, 0.5};
  const TimeGrid grid{1.0, 200};
  const auto u = ControlSchedule::constant(grid, c);
  auto marker_time = [&](std::size_t np) {
    const ControlProblem p{b, init_interface(UnitSquare{}, {0.5}, np), grid};
    return best_of(3, [&] {
      const auto ev = evaluate(p, u);
      adjoint_gradient(ev.trajectory, u, p.basis, p.length, p.forward);
    });
  };
  const double m1 = marker_time(10'000), m2 = marker_time(20'000);

  const auto short_u = ControlSchedule::constant({0.05, 10}, c);
  auto step_time = [&](std::size_t n) {
    std::size_t substeps = 0;
    const double t = best_of(3, [&] { substeps = advect(init_theta(n), short_u, b, {}).substeps; });
    return t / static_cast<double>(substeps);
  };
  const double s1 = step_time(128), s2 = step_time(256);

  const double mr = m2 / m1, sr = s2 / s1;
  const bool mok = mr >= 1.5 && mr <= 2.5, sok = sr >= 3.0 && sr <= 5.0;
  return {mok && sok, fmt::format("forward+adjoint Np 1e4 -> 2e4: {:.3f} s -> {:.3f} s, ratio {:.2f} (2 +- 25% {}); "
                                  "transport substep Ncell 128 -> 256: {:.2e} s -> {:.2e} s, ratio {:.2f} (4 +- 25% {})",
                                  m1, m2, mr, verdict(mok), s1, s2, sr, verdict(sok))};
}

Outcome unit_examples() {
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) bad.emplace_back(what);
  };
  const TimeGrid grid{1.0, 4};
  {
    // ||u|| = 5: dt * sum u^2 = 25 with every entry 5 / sqrt(2).
    const double v = 5.0 / std::sqrt(2.0);
    const double c[] = {v, v};
    const auto u = ControlSchedule::constant(grid, c);
    const auto p = project_ball(u, 10.0);
    expect(std::ranges::equal(p.values(), u.values()), "projection leaves ||u||=5 unchanged");
    const double w[] = {4.0 * v, 4.0 * v};
    const auto big = ControlSchedule::constant(grid, w);
    const auto half = project_ball(big, 10.0);
    bool halved = true;
    for (std::size_t i = 0; i < half.values().size(); ++i)
      halved = halved && std::abs(half.values()[i] - 0.5 * big.values()[i]) <= 1e-15 * big.values()[i];
    expect(halved, "projection halves ||u||=20");
    const auto again = project_ball(half, 10.0);
    expect(std::ranges::equal(again.values(), half.values()), "projection is idempotent");
  }
  {
    const std::vector<double> g{0.3, -1.2, 2.0, 0.7};
    const std::vector<double> q{1.2, 0.3, -0.7, 2.0};  // orthogonal to g
    const std::vector<double> m{-0.3, 1.2, -2.0, -0.7};
    expect(pr_beta(g, g).value() == 0.0, "pr_beta(g, g) = 0");
    double qq = 0.0, gg = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      qq += q[i] * q[i];
      gg += g[i] * g[i];
    }
    expect(std::abs(pr_beta(q, g).value() - qq / gg) <= 1e-15, "pr_beta of orthogonal gradients");
    expect(pr_beta(m, g).value() == 2.0, "pr_beta(-g, g) = 2");
  }
  {
    const double eps = 1e-8;
    const std::vector<Vec2> two{{0.0, 0.0}, {1.0, 0.0}};
    const auto p = length_gradient(two, {eps});
    const double s = 1.0 / std::sqrt(1.0 + eps * eps);
    expect(p[0].x == s && p[0].y == 0.0 && p[1].x == -s && p[1].y == 0.0, "terminal adjoint of a unit chord");
    std::vector<Vec2> line;
    for (int j = 0; j < 11; ++j) line.push_back({0.1 * j, 0.25});
    const auto q = length_gradient(line, {eps});
    bool zero = true;
    for (std::size_t j = 1; j + 1 < q.size(); ++j) zero = zero && std::abs(q[j].x) < 1e-15 && q[j].y == 0.0;
    expect(zero, "terminal adjoint vanishes on interior collinear markers");

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Vec2> curve(10);
    for (auto& x : curve) x = {U(rng), U(rng)};
    const auto r = length_gradient(curve, {eps});
    double worst = 0.0;
    for (std::size_t j = 0; j < curve.size(); ++j) {
      for (int d = 0; d < 2; ++d) {
        auto plus = curve, minus = curve;
        (d ? plus[j].y : plus[j].x) += 1e-6;
        (d ? minus[j].y : minus[j].x) -= 1e-6;
        const double fd = -(polyline_length(plus, {eps}) - polyline_length(minus, {eps})) / 2e-6;
        const double an = d ? r[j].y : r[j].x;
        worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
      }
    }
    expect(worst <= 1e-6, "terminal adjoint matches central differences");
  }
  std::string detail = "projection (3), PR-beta (3), terminal adjoint (3) examples";
  if (!bad.empty()) {
    detail += "; failed:";
    for (const auto& b : bad) detail += " [" + b + "]";
  }
  return {bad.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional argument: run only criteria whose name contains it.
  if (argc > 1) only = argv[1];
  run("gradient exactness", gradient_exactness);
  run("symplectic conservation", symplectic_conservation);
  run("second-order convergence", second_order);
  run("mix-norm oracle", mixnorm_oracle);
  run("stationary regime", stationary_regime);
  run("optimized cellular regime", optimized_cellular);
  run("ball activity", ball_activity);
  run("N=4 study", n4_study);
  run("cost scaling", cost_scaling);
  run("unit examples", unit_examples);
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
