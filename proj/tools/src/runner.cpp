#include "stirring_cli/runner.hpp"

#include "stirring_cli/manifest.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace stirring::cli {
namespace fs = std::filesystem;

namespace {

template <typename... Args>
void say(const RunContext& ctx, fmt::format_string<Args...> f, Args&&... args) {
  if (ctx.log) *ctx.log << fmt::format(f, std::forward<Args>(args)...) << '\n' << std::flush;
}

fs::path prepare_dir(const ExperimentConfig& c) {
  const fs::path dir = c.out_dir / c.name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
  return dir;
}

std::string time_tag(double t) { return fmt::format("{:.3f}", t); }

/// Step index closest to time t.
std::size_t step_at(const TimeGrid& grid, double t) {
  return std::min(grid.M, static_cast<std::size_t>(std::llround(t / grid.dt())));
}

struct FitRow {
  std::string series;
  RateFit fit;
};

std::optional<RateFit> try_fit(RateFit (*f)(std::span<const double>, std::span<const double>, FitWindow),
                               const TimeSeries& s, FitWindow w) {
  try {
    return f(s.t, s.v, w);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

/// Power-law fits need t > 0; shift the window past the first sample if it
/// sits at t = 0.
FitWindow positive_window(const TimeSeries& s, FitWindow w) {
  for (double t : s.t)
    if (t > 0.0) {
      w.t0 = std::max(w.t0, t);
      break;
    }
  return w;
}

void write_fits_csv(const fs::path& path, const std::vector<FitRow>& rows) {
  auto out = fmt::output_file(path.string());
  out.print("series,model,rate,slope,intercept,r2,trend,t0,t1,samples\n");
  for (const auto& [series, f] : rows)
    out.print("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g},{}\n", series, to_string(f.model), f.rate,
              f.slope, f.intercept, f.r2, to_string(f.trend), f.t0, f.t1, f.samples);
}

void add_fits(std::vector<FitRow>& rows, const std::string& name, const TimeSeries& s, FitWindow w) {
  if (auto f = try_fit(fit_linear, s, w)) rows.push_back({name, *f});
  if (auto f = try_fit(fit_exponential, s, w)) rows.push_back({name, *f});
  if (auto f = try_fit(fit_power_law, s, positive_window(s, w))) rows.push_back({name, *f});
}

const RateFit* find_fit(const std::vector<FitRow>& rows, const std::string& series, FitModel model) {
  for (const auto& r : rows)
    if (r.series == series && r.fit.model == model) return &r.fit;
  return nullptr;
}

/// Forward run that records the length series and writes interface
/// snapshots. Keeps only the endpoints of the trajectory in memory.
TimeSeries trace_interface(const ExperimentConfig& c, const ControlProblem& problem, const ControlSchedule& u,
                           const fs::path& dir, Manifest& manifest) {
  const TimeGrid grid = problem.grid;
  std::vector<std::size_t> interface_steps;
  for (double t : c.interface_times) interface_steps.push_back(step_at(grid, t));
  TimeSeries length;
  std::vector<fs::path> written;
  ForwardOptions fwd = problem.forward;
  fwd.checkpoint_every = grid.M;
  integrate(problem.initial, u, problem.basis, fwd, [&](std::size_t n, const MarkerSet& m) {
    if (n % c.length_every == 0 || n == grid.M) {
      length.t.push_back(grid.time(n));
      length.v.push_back(polyline_length(m, problem.length));
    }
    if (std::find(interface_steps.begin(), interface_steps.end(), n) != interface_steps.end()) {
      const fs::path p = dir / fmt::format("interface_t{}.csv", time_tag(grid.time(n)));
      write_markers_csv(p, m.positions);
      written.push_back(p);
    }
  });
  write_series_csv(dir / "length.csv", length.t, length.v);
  manifest.add_file(dir / "length.csv");
  for (const auto& p : written) manifest.add_file(p);
  return length;
}

std::vector<double> sample_times(double T, std::size_t samples) {
  std::vector<double> t;
  for (std::size_t i = 0; i <= samples; ++i) t.push_back(T * static_cast<double>(i) / static_cast<double>(samples));
  return t;
}

/// Eulerian transport of the tanh front; writes the mix-norm series and
/// field snapshots under the given file prefix.
TimeSeries transport(const ExperimentConfig& c, const FlowBasis& basis, const ControlSchedule& u, const fs::path& dir,
                     const std::string& series_file, bool write_fields, Manifest& manifest, const RunContext& ctx) {
  TransportOptions opts;
  opts.cfl = c.transport.cfl;
  opts.series_times = sample_times(c.horizon, c.transport.series_samples);
  if (write_fields) opts.snapshot_times = c.transport.field_times;
  opts.threads = c.threads;
  const auto result = advect(init_theta(c.transport.cells), u, basis, opts);
  say(ctx, "transport: {} substeps, max mass change {:.3e}", result.substeps, result.max_mass_change);
  write_series_csv(dir / series_file, result.series.times, result.series.values);
  manifest.add_file(dir / series_file);
  for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
    const std::string tag = time_tag(result.snapshot_times[i]);
    write_field_csv(dir / fmt::format("theta_t{}.csv", tag), result.snapshots[i]);
    write_field_pgm(dir / fmt::format("theta_t{}.pgm", tag), result.snapshots[i]);
    manifest.add_file(dir / fmt::format("theta_t{}.csv", tag));
    manifest.add_file(dir / fmt::format("theta_t{}.pgm", tag));
  }
  return {result.series.times, result.series.values};
}

Manifest start_manifest(const ExperimentConfig& c, const RunContext& ctx, const fs::path& dir) {
  const std::string text = dump_config(c);
  std::ofstream(dir / "config.yaml") << text;
  return Manifest(ctx.command, c.name, text, c.threads);
}

ControlSchedule stationary_reference(TimeGrid grid, std::size_t modes) {
  std::vector<double> u(modes, 0.0);
  u[0] = 1.0;
  return ControlSchedule::constant(grid, u);
}

}  // namespace

void write_controls_csv(const fs::path& path, const ControlSchedule& u) {
  auto out = fmt::output_file(path.string());
  out.print("n,t");
  for (std::size_t k = 0; k < u.modes(); ++k) out.print(",u{}", k + 1);
  out.print("\n");
  for (std::size_t n = 0; n < u.steps(); ++n) {
    out.print("{},{:.17g}", n, u.grid().time(n));
    for (double v : u.row(n)) out.print(",{:.17g}", v);
    out.print("\n");
  }
}

ControlSchedule read_controls_csv(const fs::path& path, TimeGrid grid, std::size_t modes) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open controls file {}", path.string()));
  std::string line;
  std::getline(in, line);
  std::size_t columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (line.rfind("n,t", 0) != 0 || columns != modes + 2)
    throw ConfigError(fmt::format("{}: expected header n,t,u1..u{}", path.string(), modes));
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(row, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: bad number '{}' on row {}", path.string(), cell, rows + 1));
      }
    }
    if (cells.size() != modes + 2)
      throw ConfigError(fmt::format("{}: row {} has {} columns", path.string(), rows + 1, cells.size()));
    if (static_cast<std::size_t>(cells[0]) != rows || std::abs(cells[1] - grid.time(rows)) > 1e-9 * (1 + grid.T))
      throw ConfigError(fmt::format("{}: row {} does not match the time grid (T={}, M={})", path.string(), rows + 1,
                                    grid.T, grid.M));
    values.insert(values.end(), cells.begin() + 2, cells.end());
    ++rows;
  }
  if (rows != grid.M)
    throw ConfigError(fmt::format("{}: {} rows but the time grid has M={} steps", path.string(), rows, grid.M));
  return ControlSchedule(grid, modes, std::move(values));
}

int run_simulate(const ExperimentConfig& c, const RunContext& ctx) {
  c.validate();
  const fs::path dir = prepare_dir(c);
  Manifest manifest = start_manifest(c, ctx, dir);
  Stopwatch clock;
  const ControlProblem problem = c.problem();
  const ControlSchedule u = c.initial_guess();
  say(ctx, "simulate {}: Np={} M={} T={}", c.name, c.markers, c.steps, c.horizon);
  const TimeSeries length = trace_interface(c, problem, u, dir, manifest);
  manifest.add_timing("markers", clock.lap());
  std::vector<FitRow> fits;
  add_fits(fits, "length", length, {});
  if (c.transport.cells > 0) {
    const TimeSeries mix = transport(c, problem.basis, u, dir, "mixnorm.csv", true, manifest, ctx);
    manifest.add_timing("transport", clock.lap());
    add_fits(fits, "mixnorm", mix, c.transport.fit_window);
    say(ctx, "mix-norm decay: {}", to_string(classify_decay(mix.t, mix.v, positive_window(mix, c.transport.fit_window))));
  }
  write_fits_csv(dir / "fits.csv", fits);
  manifest.add_file(dir / "fits.csv");
  if (const auto* f = find_fit(fits, "length", FitModel::Linear))
    say(ctx, "length: L(0)={:.6g} L(T)={:.6g} linear rate {:.6g} r2 {:.6f}", length.v.front(), length.v.back(),
        f->rate, f->r2);
  manifest.write(dir);
  return kOk;
}

int run_optimize(const ExperimentConfig& c, const RunContext& ctx) {
  c.validate();
  const fs::path dir = prepare_dir(c);
  Manifest manifest = start_manifest(c, ctx, dir);
  Stopwatch clock;
  const ControlProblem problem = c.problem();
  say(ctx, "optimize {}: Np={} M={} T={} N={}", c.name, c.markers, c.steps, c.horizon, c.modes());
  const auto report = optimize(problem, c.initial_guess(), c.optimizer, [&](const IterationRecord& r) {
    say(ctx, "iter {:4d}  J={:.10g}  |g|={:.3e}  step={:.3e}  beta={:.3f}{}  ball={:.3f}", r.iteration, r.cost,
        r.grad_norm, r.step_size, r.pr_beta, r.reset ? " reset" : "", r.ball_ratio);
  });
  manifest.add_timing("optimize", clock.lap());
  write_report_csv((dir / "report.csv").string(), report);
  write_controls_csv(dir / "controls.csv", report.final_controls);
  manifest.add_file(dir / "report.csv");
  manifest.add_file(dir / "controls.csv");
  const TimeSeries length = trace_interface(c, problem, report.final_controls, dir, manifest);
  manifest.add_timing("markers", clock.lap());
  std::vector<FitRow> fits;
  add_fits(fits, "length", length, {});
  write_fits_csv(dir / "fits.csv", fits);
  manifest.add_file(dir / "fits.csv");
  const double ratio = report.final_controls.l2_norm() / c.optimizer.ball_radius;
  manifest.add_note("converged", report.converged ? "true" : "false");
  manifest.add_note("iterations", std::to_string(report.iterations));
  manifest.add_note("ball_ratio", fmt::format("{:.17g}", ratio));
  if (!report.diagnostic.empty()) manifest.add_note("diagnostic", report.diagnostic);
  say(ctx, "{} after {} iterations: J={:.10g} L(T)={:.6g} ball ratio {:.4f}{}",
      report.converged ? "converged" : "stopped", report.iterations, report.final_cost.total, length.v.back(), ratio,
      report.diagnostic.empty() ? "" : " (" + report.diagnostic + ")");
  manifest.write(dir);
  return kOk;
}

int run_validate(const ExperimentConfig& c, const fs::path& controls_path, const RunContext& ctx) {
  c.validate();
  if (c.transport.cells == 0) throw ConfigError("validate needs transport.cells > 0");
  const ControlSchedule u = read_controls_csv(controls_path, c.grid(), c.modes());
  const fs::path dir = prepare_dir(c);
  Manifest manifest = start_manifest(c, ctx, dir);
  manifest.add_note("controls_sha256", sha256_file(controls_path));
  Stopwatch clock;
  const FlowBasis basis = c.make_basis();
  say(ctx, "validate {}: Ncell={} against the stationary reference", c.name, c.transport.cells);
  const TimeSeries mix = transport(c, basis, u, dir, "mixnorm.csv", true, manifest, ctx);
  manifest.add_timing("transport", clock.lap());
  const TimeSeries ref =
      transport(c, basis, stationary_reference(c.grid(), c.modes()), dir, "mixnorm_stationary.csv", false, manifest, ctx);
  manifest.add_timing("transport_reference", clock.lap());
  std::vector<FitRow> fits;
  add_fits(fits, "mixnorm", mix, c.transport.fit_window);
  add_fits(fits, "mixnorm_stationary", ref, c.transport.fit_window);
  write_fits_csv(dir / "fits.csv", fits);
  manifest.add_file(dir / "fits.csv");
  const auto* opt = find_fit(fits, "mixnorm", FitModel::Exponential);
  const auto* sta = find_fit(fits, "mixnorm_stationary", FitModel::Exponential);
  if (opt && sta) {
    const double ratio = sta->rate > 0 ? opt->rate / sta->rate : std::numeric_limits<double>::infinity();
    say(ctx, "exponential mix-norm rate {:.6g} (r2 {:.4f}) vs stationary {:.6g}: ratio {:.3f}", opt->rate, opt->r2,
        sta->rate, ratio);
    manifest.add_note("rate_ratio", fmt::format("{:.17g}", ratio));
  }
  say(ctx, "decay class: controls {}, stationary {}",
      to_string(classify_decay(mix.t, mix.v, positive_window(mix, c.transport.fit_window))),
      to_string(classify_decay(ref.t, ref.v, positive_window(ref, c.transport.fit_window))));
  manifest.write(dir);
  return kOk;
}

int run_gradcheck(const ExperimentConfig& c, const RunContext& ctx) {
  c.validate();
  const fs::path dir = prepare_dir(c);
  Manifest manifest = start_manifest(c, ctx, dir);
  Stopwatch clock;
  const ControlProblem problem = c.problem();
  const auto& g = c.gradcheck;
  auto out = fmt::output_file((dir / "gradcheck.csv").string());
  out.print("instance,max_abs_error,max_abs_gradient,relative_error\n");
  double worst = 0.0;
  for (std::size_t i = 0; i < g.instances; ++i) {
    std::mt19937_64 rng(g.seed + i);
    std::uniform_real_distribution<double> dist(-g.amplitude, g.amplitude);
    ControlSchedule u = ControlSchedule::sampled(problem.grid, c.modes(), [&](double, std::size_t) { return dist(rng); });
    u = project_ball(u, c.optimizer.ball_radius);
    const auto ev = evaluate(problem, u);
    const auto grad = adjoint_gradient(ev.trajectory, u, problem.basis, problem.length, problem.forward);
    double err = 0.0, scale = 0.0;
    ControlSchedule w = u;
    for (std::size_t j = 0; j < w.values().size(); ++j) {
      const double keep = w.values()[j];
      w.values()[j] = keep + g.fd_step;
      const double jp = evaluate(problem, w).cost.total;
      w.values()[j] = keep - g.fd_step;
      const double jm = evaluate(problem, w).cost.total;
      w.values()[j] = keep;
      const double fd = (jp - jm) / (2.0 * g.fd_step);
      err = std::max(err, std::abs(fd - grad.values()[j]));
      scale = std::max(scale, std::abs(grad.values()[j]));
    }
    const double rel = scale > 0 ? err / scale : err;
    worst = std::max(worst, rel);
    out.print("{},{:.17g},{:.17g},{:.17g}\n", i, err, scale, rel);
    say(ctx, "instance {:3d}: relative error {:.3e}", i, rel);
  }
  out.close();
  manifest.add_file(dir / "gradcheck.csv");
  manifest.add_timing("gradcheck", clock.lap());
  manifest.add_note("worst_relative_error", fmt::format("{:.17g}", worst));
  manifest.write(dir);
  const bool pass = worst <= g.tolerance;
  say(ctx, "gradcheck {}: worst relative error {:.3e} (tolerance {:.1e})", pass ? "passed" : "FAILED", worst,
      g.tolerance);
  return pass ? kOk : kGradcheckFailed;
}

int run_rates(const fs::path& series_path, FitWindow window, std::ostream& out) {
  TimeSeries s;
  try {
    s = read_series_csv(series_path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  std::vector<FitRow> rows;
  add_fits(rows, series_path.stem().string(), s, window);
  if (rows.empty()) throw ConfigError(fmt::format("{}: too few samples in the fit window", series_path.string()));
  std::string line = series_path.filename().string() + ":";
  nlohmann::ordered_json j;
  j["series"] = series_path.string();
  for (const auto& [name, f] : rows) {
    line += fmt::format(" {} rate={:.6g} ({}) r2={:.6f};", to_string(f.model), f.rate, to_string(f.trend), f.r2);
    j["fits"].push_back({{"model", to_string(f.model)},
                         {"rate", f.rate},
                         {"slope", f.slope},
                         {"intercept", f.intercept},
                         {"r2", f.r2},
                         {"trend", to_string(f.trend)},
                         {"t0", f.t0},
                         {"t1", f.t1},
                         {"samples", f.samples}});
  }
  if (find_fit(rows, rows.front().series, FitModel::Exponential)) {
    const FitWindow pw = positive_window(s, window);
    bool positive = std::all_of(s.v.begin(), s.v.end(), [](double v) { return v > 0; });
    if (positive) {
      try {
        j["decay_class"] = to_string(classify_decay(s.t, s.v, pw));
        j["growth_class"] = to_string(classify_growth(s.t, s.v, window));
        line += fmt::format(" decay={} growth={}", j["decay_class"].get<std::string>(),
                            j["growth_class"].get<std::string>());
      } catch (const std::invalid_argument&) {
      }
    }
  }
  out << line << '\n' << j.dump() << '\n';
  return kOk;
}

}  // namespace stirring::cli
