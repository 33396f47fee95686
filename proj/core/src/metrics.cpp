#include "stirring/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace stirring {

namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

// OLS of y on x. Both are shifted by their first entry so that constant
// data give an exactly zero slope.
Line ols(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double x0 = x.front();
  const double y0 = y.front();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i] - x0;
    my += y[i] - y0;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = (x[i] - x0) - mx;
    const double dy = (y[i] - y0) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit needs at least two distinct abscissae");
  Line l;
  l.slope = sxy / sxx;
  l.intercept = (y0 + my) - l.slope * (x0 + mx);
  if (syy == 0.0) {
    l.r2 = 1.0;
  } else {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (l.intercept + l.slope * x[i]);
      sse += r * r;
    }
    l.r2 = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  }
  return l;
}

struct Windowed {
  std::vector<double> t, v;
};

Windowed select(std::span<const double> t, std::span<const double> v, FitWindow w) {
  if (t.size() != v.size()) throw std::invalid_argument("time and value arrays differ in length");
  Windowed s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= w.t0 && t[i] <= w.t1) {
      s.t.push_back(t[i]);
      s.v.push_back(v[i]);
    }
  }
  if (s.t.size() < 3) throw std::invalid_argument("fit needs at least 3 samples in the window");
  return s;
}

RateFit finish(FitModel model, const Line& l, const Windowed& s) {
  RateFit f;
  f.model = model;
  f.slope = l.slope;
  f.rate = std::abs(l.slope);
  f.intercept = l.intercept;
  f.r2 = l.r2;
  f.trend = l.slope > 0.0 ? Trend::Growth : (l.slope < 0.0 ? Trend::Decay : Trend::Flat);
  f.t0 = s.t.front();
  f.t1 = s.t.back();
  f.samples = s.t.size();
  return f;
}

std::vector<double> logs(const std::vector<double>& v, const char* what) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw std::invalid_argument(fmt::format("{} fit needs positive values", what));
    out[i] = std::log(v[i]);
  }
  return out;
}

}  // namespace

RateFit fit_linear(std::span<const double> t, std::span<const double> v, FitWindow window) {
  const Windowed s = select(t, v, window);
  return finish(FitModel::Linear, ols(s.t, s.v), s);
}

RateFit fit_exponential(std::span<const double> t, std::span<const double> v, FitWindow window) {
  const Windowed s = select(t, v, window);
  return finish(FitModel::Exponential, ols(s.t, logs(s.v, "exponential")), s);
}

RateFit fit_power_law(std::span<const double> t, std::span<const double> v, FitWindow window) {
  const Windowed s = select(t, v, window);
  return finish(FitModel::PowerLaw, ols(logs(s.t, "power-law"), logs(s.v, "power-law")), s);
}

DecayClass classify_decay(std::span<const double> t, std::span<const double> v, FitWindow window) {
  const RateFit p = fit_power_law(t, v, window);
  const RateFit e = fit_exponential(t, v, window);
  return p.r2 > e.r2 ? DecayClass::Polynomial : DecayClass::Exponential;
}

GrowthClass classify_growth(std::span<const double> t, std::span<const double> v, FitWindow window) {
  const RateFit l = fit_linear(t, v, window);
  const RateFit e = fit_exponential(t, v, window);
  return e.r2 > l.r2 ? GrowthClass::Exponential : GrowthClass::Linear;
}

const char* to_string(FitModel m) {
  switch (m) {
    case FitModel::Linear: return "linear";
    case FitModel::Exponential: return "exponential";
    case FitModel::PowerLaw: return "power_law";
  }
  return "?";
}

const char* to_string(Trend t) {
  switch (t) {
    case Trend::Growth: return "growth";
    case Trend::Decay: return "decay";
    case Trend::Flat: return "flat";
  }
  return "?";
}

const char* to_string(DecayClass c) { return c == DecayClass::Polynomial ? "polynomial" : "exponential"; }
const char* to_string(GrowthClass c) { return c == GrowthClass::Linear ? "linear" : "exponential"; }

TimeSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
  TimeSeries s;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(fmt::format("{}:{}: expected two columns", path.string(), lineno));
    try {
      s.t.push_back(std::stod(line.substr(0, comma)));
      s.v.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error(fmt::format("{}:{}: not a number", path.string(), lineno));
    }
  }
  return s;
}

void write_series_csv(const std::filesystem::path& path, std::span<const double> t, std::span<const double> v) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "t,value\n";
  for (std::size_t i = 0; i < t.size(); ++i) os << fmt::format("{:.17g},{:.17g}\n", t[i], v[i]);
}

}  // namespace stirring
