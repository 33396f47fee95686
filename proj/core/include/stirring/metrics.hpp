#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace stirring {

enum class FitModel { Linear, Exponential, PowerLaw };
enum class Trend { Growth, Decay, Flat };

/// Closed fitting window [t0, t1]; the default covers the whole series.
struct FitWindow {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
};

/// Ordinary least squares fit of one growth model.
///   Linear:      value = intercept + slope t
///   Exponential: log value = intercept + slope t
///   PowerLaw:    log value = intercept + slope log t
/// `rate` is |slope|; `trend` carries the sign.
struct RateFit {
  FitModel model = FitModel::Linear;
  double rate = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  Trend trend = Trend::Flat;
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t samples = 0;
};

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> v;
};

/// Throws std::invalid_argument with fewer than 3 samples in the window.
RateFit fit_linear(std::span<const double> t, std::span<const double> v, FitWindow window = {});

/// Throws std::invalid_argument on nonpositive values in the window.
RateFit fit_exponential(std::span<const double> t, std::span<const double> v, FitWindow window = {});

/// Requires t > 0 and values > 0 in the window.
RateFit fit_power_law(std::span<const double> t, std::span<const double> v, FitWindow window = {});

enum class DecayClass { Polynomial, Exponential };

/// Polynomial if the log-log fit explains more variance than the log-linear one.
DecayClass classify_decay(std::span<const double> t, std::span<const double> v, FitWindow window = {});

/// Exponential if the log-linear fit explains more variance than the linear one.
enum class GrowthClass { Linear, Exponential };
GrowthClass classify_growth(std::span<const double> t, std::span<const double> v, FitWindow window = {});

const char* to_string(FitModel m);
const char* to_string(Trend t);
const char* to_string(DecayClass c);
const char* to_string(GrowthClass c);

/// Two-column CSV with header `t,value`.
TimeSeries read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, std::span<const double> t, std::span<const double> v);

}  // namespace stirring
