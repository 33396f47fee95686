#include "stirring_cli/config.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <functional>
#include <map>

namespace stirring::cli {
namespace {

std::vector<double> evenly(double T, int parts) {
  std::vector<double> t;
  for (int i = 0; i <= parts; ++i) t.push_back(T * i / parts);
  return t;
}

ExperimentConfig cellular_stationary() {
  ExperimentConfig c;
  c.name = "cellular-stationary";
  c.basis = {BasisKind::Cellular, {1}};
  c.gamma = {1e-5};
  c.guess = {GuessKind::Constant, {1.0}};
  c.markers = 10'000;
  c.horizon = 5.0;
  c.steps = 1000;
  c.transport.cells = 256;
  c.transport.series_samples = 100;
  c.transport.field_times = evenly(5.0, 5);
  c.transport.fit_window = {1.0, 5.0};
  c.interface_times = evenly(5.0, 5);
  return c;
}

ExperimentConfig doswell_stationary() {
  ExperimentConfig c;
  c.name = "doswell-stationary";
  c.basis = {BasisKind::Doswell, {}};
  c.guess = {GuessKind::Constant, {1.0, 0.0}};
  c.markers = 10'000;
  c.horizon = 10.0;
  c.steps = 2000;
  c.interface_times = evenly(10.0, 5);
  return c;
}

ExperimentConfig cellular_const() {
  ExperimentConfig c;
  c.name = "cellular-const";
  c.basis = {BasisKind::Cellular, {1, 2}};
  c.guess = {GuessKind::Constant, {1.0, 1.0}};
  c.markers = 20'000;
  c.horizon = 1.0;
  c.steps = 200;
  c.transport.cells = 256;
  c.transport.series_samples = 100;
  c.transport.field_times = evenly(1.0, 5);
  c.interface_times = evenly(1.0, 5);
  return c;
}

ExperimentConfig cellular_osc() {
  auto c = cellular_const();
  c.name = "cellular-osc";
  c.guess = {GuessKind::Oscillatory, {}};
  return c;
}

ExperimentConfig cellular_n4() {
  auto c = cellular_const();
  c.name = "cellular-n4";
  c.basis = {BasisKind::Cellular, {1, 2, 3, 4}};
  c.gamma = {1e-5, 1e-5, 1e-5, 1e-5};
  c.guess = {GuessKind::Constant, {1.0, 1.0, 0.0, 0.0}};
  return c;
}

ExperimentConfig doswell_const() {
  ExperimentConfig c;
  c.name = "doswell-const";
  c.basis = {BasisKind::Doswell, {}};
  c.guess = {GuessKind::Constant, {1.0, 1.0}};
  c.markers = 5'000;
  c.horizon = 5.0;
  c.steps = 500;
  c.interface_times = evenly(5.0, 5);
  return c;
}

ExperimentConfig doswell_osc() {
  auto c = doswell_const();
  c.name = "doswell-osc";
  c.guess = {GuessKind::Oscillatory, {}};
  return c;
}

ExperimentConfig gradcheck() {
  ExperimentConfig c;
  c.name = "gradcheck";
  c.basis = {BasisKind::Cellular, {1, 2}};
  c.markers = 200;
  c.horizon = 0.25;
  c.steps = 50;
  c.gradcheck = {20, 0.5, 1e-6, 1e-5, 1};
  return c;
}

const std::map<std::string, std::function<ExperimentConfig()>>& registry() {
  static const std::map<std::string, std::function<ExperimentConfig()>> presets{
      {"cellular-stationary", cellular_stationary},
      {"doswell-stationary", doswell_stationary},
      {"cellular-const", cellular_const},
      {"cellular-osc", cellular_osc},
      {"cellular-n4", cellular_n4},
      {"doswell-const", doswell_const},
      {"doswell-osc", doswell_osc},
      {"gradcheck", gradcheck},
  };
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, make] : registry()) names.push_back(name);
  return names;
}

ExperimentConfig preset(const std::string& name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end())
    throw ConfigError(fmt::format("unknown preset '{}' (available: {})", name, fmt::join(preset_names(), ", ")));
  return it->second();
}

}  // namespace stirring::cli
