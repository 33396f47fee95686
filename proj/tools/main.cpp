#include "stirring_cli/config.hpp"
#include "stirring_cli/runner.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <limits>

namespace {

using namespace stirring;
using namespace stirring::cli;

struct CommonArgs {
  std::string config;
  std::string preset;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "YAML experiment configuration");
  cmd->add_option("--preset", a.preset, "Start from a named preset; --config overrides its keys");
  cmd->add_option("--out", a.out, "Output root; results go to <out>/<name>/");
  cmd->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonArgs& a) {
  ExperimentConfig c = a.preset.empty() ? ExperimentConfig{} : preset(a.preset);
  if (!a.config.empty()) c = load_config(a.config, std::move(c));
  if (a.preset.empty() && a.config.empty()) throw ConfigError("either --config or --preset is required");
  if (!a.out.empty()) c.out_dir = a.out;
  if (a.threads > 0) c.threads = a.threads;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interface-length stirring optimizer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", STIRRING_VERSION);

  CommonArgs sim_args, opt_args, val_args, grad_args;
  auto* sim = app.add_subcommand("simulate", "Run the initial-guess controls and record length and mix-norm");
  add_common(sim, sim_args);
  auto* opt = app.add_subcommand("optimize", "Optimize the controls by projected conjugate gradients");
  add_common(opt, opt_args);
  auto* val = app.add_subcommand("validate", "Transport validation of a controls.csv file");
  add_common(val, val_args);
  std::string controls;
  val->add_option("--controls", controls, "controls.csv produced by optimize")->required();
  auto* grad = app.add_subcommand("gradcheck", "Compare the adjoint gradient with finite differences");
  add_common(grad, grad_args);
  auto* rates = app.add_subcommand("rates", "Fit growth and decay rates to a t,value series");
  std::string series;
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  rates->add_option("--input", series, "Series CSV")->required();
  rates->add_option("--t0", t0, "Fit window start");
  rates->add_option("--t1", t1, "Fit window end");
  auto* presets = app.add_subcommand("presets", "List the built-in presets");
  std::string show;
  presets->add_option("--show", show, "Print one preset as YAML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunContext ctx{command, &std::cerr};
  try {
    if (command == "simulate") return run_simulate(resolve(sim_args), ctx);
    if (command == "optimize") return run_optimize(resolve(opt_args), ctx);
    if (command == "validate") return run_validate(resolve(val_args), controls, ctx);
    if (command == "gradcheck") return run_gradcheck(resolve(grad_args), ctx);
    if (command == "rates") return run_rates(series, {t0, t1}, std::cout);
    if (!show.empty()) {
      std::cout << dump_config(preset(show));
      return kOk;
    }
    for (const auto& name : preset_names()) std::cout << name << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  }
}
