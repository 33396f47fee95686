#pragma once

#include <stirring/stirring.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace stirring::cli {

/// Raised for malformed, incomplete or inconsistent configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BasisKind { Cellular, Doswell };
enum class GuessKind { Constant, Oscillatory };

struct BasisSpec {
  BasisKind kind = BasisKind::Cellular;
  std::vector<int> orders{1, 2};  // cellular only
  /// Cut vortices of the second Doswell mode.
  std::vector<DoswellVortex> cluster = FlowBasis::default_cluster();
};

/// Constant: u_k(t) = values[k]. Oscillatory: u_1 = cos(pi t / 2),
/// u_2 = sin(pi t / 2), remaining modes zero.
struct GuessSpec {
  GuessKind kind = GuessKind::Constant;
  std::vector<double> values{1.0, 1.0};
};

struct TransportSpec {
  std::size_t cells = 0;  // 0 disables the Eulerian solve
  double cfl = 0.5;
  std::size_t series_samples = 100;
  std::vector<double> field_times;
  FitWindow fit_window{};
};

struct GradcheckSpec {
  std::size_t instances = 20;
  double amplitude = 0.5;
  double fd_step = 1e-6;
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string name = "experiment";
  BasisSpec basis{};
  std::size_t markers = 1000;
  std::size_t steps = 100;
  double horizon = 1.0;
  double epsilon = 1e-8;
  std::vector<double> gamma{1e-5, 1e-5};
  GuessSpec guess{};
  MidpointSolver solver{};
  std::size_t checkpoint_every = 1;
  OptimizerConfig optimizer{};
  TransportSpec transport{};
  GradcheckSpec gradcheck{};
  std::vector<double> interface_times;
  std::size_t length_every = 1;
  std::filesystem::path out_dir = "out";
  int threads = 1;

  std::size_t modes() const;
  TimeGrid grid() const { return {horizon, steps}; }
  Domain domain() const;
  FlowBasis make_basis() const;
  ControlSchedule initial_guess() const;
  ControlProblem problem() const;

  /// Checks every invariant; throws ConfigError.
  void validate() const;
};

/// Parses YAML; unknown keys are rejected. Keys absent from `text` keep the
/// values of `base`.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Canonical YAML rendering; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const ExperimentConfig& config);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

}  // namespace stirring::cli
