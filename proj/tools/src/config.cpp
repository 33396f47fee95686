#include "stirring_cli/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>

namespace stirring::cli {
namespace {

// Shortest text that parses back to the same double.
struct Num {
  double v;
};

YAML::Emitter& operator<<(YAML::Emitter& e, Num n) { return e << fmt::format("{}", n.v); }

struct Nums {
  std::vector<double> v;
};

YAML::Emitter& operator<<(YAML::Emitter& e, const Nums& n) {
  e << YAML::Flow << YAML::BeginSeq;
  for (double x : n.v) e << Num{x};
  return e << YAML::EndSeq;
}

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping", where));
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!keys.contains(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  const auto child = node[key];
  if (!child) return;
  try {
    out = child.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}.{}: bad value '{}'", where, key, YAML::Dump(child)));
  }
}


BasisKind parse_basis_kind(const std::string& s) {
  if (s == "cellular") return BasisKind::Cellular;
  if (s == "doswell") return BasisKind::Doswell;
  throw ConfigError(fmt::format("basis.kind: expected cellular or doswell, got '{}'", s));
}

GuessKind parse_guess_kind(const std::string& s) {
  if (s == "constant") return GuessKind::Constant;
  if (s == "oscillatory") return GuessKind::Oscillatory;
  throw ConfigError(fmt::format("initial_guess.kind: expected constant or oscillatory, got '{}'", s));
}

}  // namespace

std::size_t ExperimentConfig::modes() const {
  return basis.kind == BasisKind::Cellular ? basis.orders.size() : 2;
}

Domain ExperimentConfig::domain() const {
  if (basis.kind == BasisKind::Cellular) return UnitSquare{};
  return Disc{};
}

FlowBasis ExperimentConfig::make_basis() const {
  if (basis.kind == BasisKind::Cellular) {
    std::vector<FlowMode> modes;
    for (int k : basis.orders) modes.emplace_back(SineProduct{k});
    return FlowBasis(UnitSquare{}, std::move(modes), gamma);
  }
  std::vector<FlowMode> modes{DoswellMode{{DoswellVortex{{0.5, 0.5}, 0.5, false}}},
                              DoswellMode{basis.cluster}};
  try {
    return FlowBasis(Disc{}, std::move(modes), gamma);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("basis: {}", e.what()));
  }
}

ControlSchedule ExperimentConfig::initial_guess() const {
  const auto g = grid();
  if (guess.kind == GuessKind::Constant) return ControlSchedule::constant(g, guess.values);
  return ControlSchedule::sampled(g, modes(), [](double t, std::size_t k) {
    const double a = std::numbers::pi * t / 2.0;
    if (k == 0) return std::cos(a);
    if (k == 1) return std::sin(a);
    return 0.0;
  });
}

ControlProblem ExperimentConfig::problem() const {
  ForwardOptions fwd{solver, checkpoint_every, threads};
  return ControlProblem{make_basis(), init_interface(domain(), HorizontalLine{0.5}, markers), grid(),
                        LengthParams{epsilon}, fwd};
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (name.empty() || name.find('/') != std::string::npos) fail("name must be a nonempty plain file name");
  if (basis.kind == BasisKind::Cellular) {
    if (basis.orders.empty()) fail("basis.orders must not be empty");
    for (int k : basis.orders)
      if (k < 1 || k > 32) fail(fmt::format("basis.orders: order {} outside [1, 32]", k));
  } else {
    if (basis.cluster.empty()) fail("basis.vortices must not be empty");
    for (const auto& v : basis.cluster) {
      if (!(v.radius > 0.0)) fail("basis.vortices: radius must be positive");
      if (norm(v.center - Vec2{0.5, 0.5}) + v.radius > 0.5 + 1e-12)
        fail(fmt::format("basis.vortices: disc at ({}, {}) radius {} leaves the domain", v.center.x, v.center.y,
                         v.radius));
    }
  }
  if (markers < 2) fail("markers must be at least 2");
  if (steps < 1) fail("steps must be at least 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon must be positive");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (gamma.size() != modes())
    fail(fmt::format("gamma has {} entries but the basis has {} modes", gamma.size(), modes()));
  for (double g : gamma)
    if (!(g > 0.0) || !std::isfinite(g)) fail("gamma entries must be positive");
  if (guess.kind == GuessKind::Constant) {
    if (guess.values.size() != modes())
      fail(fmt::format("initial_guess.values has {} entries but the basis has {} modes", guess.values.size(),
                       modes()));
    for (double v : guess.values)
      if (!std::isfinite(v)) fail("initial_guess.values must be finite");
  }
  if (solver.kind == MidpointSolver::Kind::Newton && !(solver.tol > 0.0)) fail("solver.tol must be positive");
  if (checkpoint_every < 1) fail("checkpoint_every must be at least 1");
  try {
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    fail(fmt::format("optimizer: {}", e.what()));
  }
  if (transport.cells != 0) {
    if (basis.kind != BasisKind::Cellular) fail("transport is only available on the unit square");
    if (transport.cells < 4) fail("transport.cells must be 0 or at least 4");
  }
  if (!(transport.cfl > 0.0 && transport.cfl <= 0.5)) fail("transport.cfl must lie in (0, 0.5]");
  if (transport.series_samples < 1) fail("transport.series_samples must be at least 1");
  if (!(transport.fit_window.t0 < transport.fit_window.t1)) fail("transport.fit_window must satisfy t0 < t1");
  for (double t : transport.field_times)
    if (t < 0.0 || t > horizon) fail(fmt::format("transport.field_times: {} outside [0, horizon]", t));
  for (double t : interface_times)
    if (t < 0.0 || t > horizon) fail(fmt::format("output.interface_times: {} outside [0, horizon]", t));
  if (length_every < 1) fail("output.length_every must be at least 1");
  if (gradcheck.instances < 1) fail("gradcheck.instances must be at least 1");
  if (!(gradcheck.amplitude > 0.0)) fail("gradcheck.amplitude must be positive");
  if (!(gradcheck.fd_step > 0.0)) fail("gradcheck.fd_step must be positive");
  if (!(gradcheck.tolerance > 0.0)) fail("gradcheck.tolerance must be positive");
  if (threads < 1) fail("threads must be at least 1");
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig c) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("malformed YAML: {}", e.what()));
  }
  if (root.IsNull()) return c;
  check_keys(root, "config",
             {"name", "basis", "markers", "steps", "horizon", "epsilon", "gamma", "initial_guess", "solver",
              "checkpoint_every", "optimizer", "transport", "gradcheck", "output", "threads"});
  read(root, "name", c.name, "");
  if (auto b = root["basis"]) {
    check_keys(b, "basis", {"kind", "orders", "vortices"});
    std::string kind = c.basis.kind == BasisKind::Cellular ? "cellular" : "doswell";
    read(b, "kind", kind, "basis");
    c.basis.kind = parse_basis_kind(kind);
    read(b, "orders", c.basis.orders, "basis");
    if (auto vs = b["vortices"]) {
      if (!vs.IsSequence()) throw ConfigError("basis.vortices: expected a list");
      c.basis.cluster.clear();
      for (const auto& v : vs) {
        check_keys(v, "basis.vortices[]", {"center", "radius"});
        std::vector<double> center;
        double radius = 0.0;
        read(v, "center", center, "basis.vortices[]");
        read(v, "radius", radius, "basis.vortices[]");
        if (center.size() != 2) throw ConfigError("basis.vortices[].center: expected [x1, x2]");
        c.basis.cluster.push_back({{center[0], center[1]}, radius, true});
      }
    }
  }
  read(root, "markers", c.markers, "");
  read(root, "steps", c.steps, "");
  read(root, "horizon", c.horizon, "");
  read(root, "epsilon", c.epsilon, "");
  read(root, "gamma", c.gamma, "");
  if (auto g = root["initial_guess"]) {
    check_keys(g, "initial_guess", {"kind", "values"});
    std::string kind = c.guess.kind == GuessKind::Constant ? "constant" : "oscillatory";
    read(g, "kind", kind, "initial_guess");
    c.guess.kind = parse_guess_kind(kind);
    read(g, "values", c.guess.values, "initial_guess");
  }
  if (auto s = root["solver"]) {
    check_keys(s, "solver", {"kind", "tol", "max_newton"});
    std::string kind = c.solver.kind == MidpointSolver::Kind::Fixed5 ? "fixed5" : "newton";
    read(s, "kind", kind, "solver");
    if (kind == "fixed5")
      c.solver.kind = MidpointSolver::Kind::Fixed5;
    else if (kind == "newton")
      c.solver.kind = MidpointSolver::Kind::Newton;
    else
      throw ConfigError(fmt::format("solver.kind: expected fixed5 or newton, got '{}'", kind));
    read(s, "tol", c.solver.tol, "solver");
    read(s, "max_newton", c.solver.max_newton, "solver");
  }
  read(root, "checkpoint_every", c.checkpoint_every, "");
  if (auto o = root["optimizer"]) {
    const std::string w = "optimizer";
    check_keys(o, w,
               {"c1", "backtrack_factor", "initial_step", "max_backtracks", "tol", "max_iters", "ball_radius",
                "barzilai_borwein", "steepest_descent"});
    auto& cfg = c.optimizer;
    read(o, "c1", cfg.c1, w);
    read(o, "backtrack_factor", cfg.backtrack_factor, w);
    read(o, "initial_step", cfg.initial_step, w);
    read(o, "max_backtracks", cfg.max_backtracks, w);
    read(o, "tol", cfg.tol, w);
    read(o, "max_iters", cfg.max_iters, w);
    read(o, "ball_radius", cfg.ball_radius, w);
    read(o, "barzilai_borwein", cfg.barzilai_borwein, w);
    read(o, "steepest_descent", cfg.steepest_descent, w);
  }
  if (auto t = root["transport"]) {
    const std::string w = "transport";
    check_keys(t, w, {"cells", "cfl", "series_samples", "field_times", "fit_window"});
    read(t, "cells", c.transport.cells, w);
    read(t, "cfl", c.transport.cfl, w);
    read(t, "series_samples", c.transport.series_samples, w);
    read(t, "field_times", c.transport.field_times, w);
    if (auto fw = t["fit_window"]) {
      std::vector<double> bounds;
      read(t, "fit_window", bounds, w);
      if (bounds.size() != 2) throw ConfigError("transport.fit_window: expected [t0, t1]");
      c.transport.fit_window = {bounds[0], bounds[1]};
    }
  }
  if (auto g = root["gradcheck"]) {
    const std::string w = "gradcheck";
    check_keys(g, w, {"instances", "amplitude", "fd_step", "tolerance", "seed"});
    read(g, "instances", c.gradcheck.instances, w);
    read(g, "amplitude", c.gradcheck.amplitude, w);
    read(g, "fd_step", c.gradcheck.fd_step, w);
    read(g, "tolerance", c.gradcheck.tolerance, w);
    read(g, "seed", c.gradcheck.seed, w);
  }
  if (auto o = root["output"]) {
    check_keys(o, "output", {"dir", "interface_times", "length_every"});
    std::string dir = c.out_dir.string();
    read(o, "dir", dir, "output");
    c.out_dir = dir;
    read(o, "interface_times", c.interface_times, "output");
    read(o, "length_every", c.length_every, "output");
  }
  read(root, "threads", c.threads, "");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

std::string dump_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;
  e << YAML::Key << "basis" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << (c.basis.kind == BasisKind::Cellular ? "cellular" : "doswell");
  if (c.basis.kind == BasisKind::Cellular) {
    e << YAML::Key << "orders" << YAML::Value << YAML::Flow << c.basis.orders;
  } else {
    e << YAML::Key << "vortices" << YAML::Value << YAML::BeginSeq;
    for (const auto& v : c.basis.cluster) {
      e << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "center" << YAML::Value << Nums{std::vector<double>{v.center.x, v.center.y}};
      e << YAML::Key << "radius" << YAML::Value << Num{v.radius};
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }
  e << YAML::EndMap;
  e << YAML::Key << "markers" << YAML::Value << c.markers;
  e << YAML::Key << "steps" << YAML::Value << c.steps;
  e << YAML::Key << "horizon" << YAML::Value << Num{c.horizon};
  e << YAML::Key << "epsilon" << YAML::Value << Num{c.epsilon};
  e << YAML::Key << "gamma" << YAML::Value << Nums{c.gamma};
  e << YAML::Key << "initial_guess" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << (c.guess.kind == GuessKind::Constant ? "constant" : "oscillatory");
  if (c.guess.kind == GuessKind::Constant) e << YAML::Key << "values" << YAML::Value << Nums{c.guess.values};
  e << YAML::EndMap;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value
    << (c.solver.kind == MidpointSolver::Kind::Fixed5 ? "fixed5" : "newton");
  e << YAML::Key << "tol" << YAML::Value << Num{c.solver.tol};
  e << YAML::Key << "max_newton" << YAML::Value << c.solver.max_newton;
  e << YAML::EndMap;
  e << YAML::Key << "checkpoint_every" << YAML::Value << c.checkpoint_every;
  const auto& o = c.optimizer;
  e << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "c1" << YAML::Value << Num{o.c1};
  e << YAML::Key << "backtrack_factor" << YAML::Value << Num{o.backtrack_factor};
  e << YAML::Key << "initial_step" << YAML::Value << Num{o.initial_step};
  e << YAML::Key << "max_backtracks" << YAML::Value << o.max_backtracks;
  e << YAML::Key << "tol" << YAML::Value << Num{o.tol};
  e << YAML::Key << "max_iters" << YAML::Value << o.max_iters;
  e << YAML::Key << "ball_radius" << YAML::Value << Num{o.ball_radius};
  e << YAML::Key << "barzilai_borwein" << YAML::Value << o.barzilai_borwein;
  e << YAML::Key << "steepest_descent" << YAML::Value << o.steepest_descent;
  e << YAML::EndMap;
  const auto& t = c.transport;
  e << YAML::Key << "transport" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "cells" << YAML::Value << t.cells;
  e << YAML::Key << "cfl" << YAML::Value << Num{t.cfl};
  e << YAML::Key << "series_samples" << YAML::Value << t.series_samples;
  e << YAML::Key << "field_times" << YAML::Value << Nums{t.field_times};
  if (std::isfinite(t.fit_window.t0) || std::isfinite(t.fit_window.t1)) {
    const double lo = std::isfinite(t.fit_window.t0) ? t.fit_window.t0 : -1e300;
    const double hi = std::isfinite(t.fit_window.t1) ? t.fit_window.t1 : 1e300;
    e << YAML::Key << "fit_window" << YAML::Value << Nums{std::vector<double>{lo, hi}};
  }
  e << YAML::EndMap;
  const auto& g = c.gradcheck;
  e << YAML::Key << "gradcheck" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "instances" << YAML::Value << g.instances;
  e << YAML::Key << "amplitude" << YAML::Value << Num{g.amplitude};
  e << YAML::Key << "fd_step" << YAML::Value << Num{g.fd_step};
  e << YAML::Key << "tolerance" << YAML::Value << Num{g.tolerance};
  e << YAML::Key << "seed" << YAML::Value << g.seed;
  e << YAML::EndMap;
  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dir" << YAML::Value << c.out_dir.string();
  e << YAML::Key << "interface_times" << YAML::Value << Nums{c.interface_times};
  e << YAML::Key << "length_every" << YAML::Value << c.length_every;
  e << YAML::EndMap;
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace stirring::cli
