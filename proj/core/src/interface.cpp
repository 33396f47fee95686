#include "stirring/interface.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "stirring/parallel.hpp"

namespace stirring {

namespace {

struct Chord {
  Vec2 a, b;
};

Chord clip_line(const Domain& domain, double y0) {
  if (std::holds_alternative<UnitSquare>(domain)) {
    if (y0 < 0.0 || y0 > 1.0) throw std::invalid_argument("interface line lies outside the unit square");
    return {{0.0, y0}, {1.0, y0}};
  }
  const auto& d = std::get<Disc>(domain);
  const double dy = y0 - d.center.y;
  if (std::abs(dy) >= d.radius) throw std::invalid_argument("interface line misses the disc");
  const double half = std::sqrt(d.radius * d.radius - dy * dy);
  return {{d.center.x - half, y0}, {d.center.x + half, y0}};
}

}  // namespace

MarkerSet init_interface(const Domain& domain, HorizontalLine curve, std::size_t np) {
  if (np < 2) throw std::invalid_argument("an interface needs at least two markers");
  const Chord c = clip_line(domain, curve.y0);
  MarkerSet m;
  m.positions.resize(np);
  const double last = static_cast<double>(np - 1);
  for (std::size_t j = 0; j < np; ++j) {
    const double s = static_cast<double>(j) / last;
    m.positions[j] = {c.a.x + s * (c.b.x - c.a.x), curve.y0};
  }
  m.positions.back() = c.b;
  return m;
}

double polyline_length(std::span<const Vec2> markers, const LengthParams& params) {
  if (markers.size() < 2) return 0.0;
  std::vector<double> chords(markers.size() - 1);
  for (std::size_t j = 0; j + 1 < markers.size(); ++j)
    chords[j] = regularized_norm(markers[j + 1] - markers[j], params.epsilon);
  return pairwise_sum(chords);
}

std::vector<Vec2> length_gradient(std::span<const Vec2> markers, const LengthParams& params) {
  const std::size_t np = markers.size();
  std::vector<Vec2> p(np);
  if (np < 2) return p;
  Vec2 prev{};
  for (std::size_t j = 0; j + 1 < np; ++j) {
    const Vec2 z = markers[j + 1] - markers[j];
    const Vec2 tau = (1.0 / regularized_norm(z, params.epsilon)) * z;
    p[j] = tau - prev;
    prev = tau;
  }
  p[np - 1] = -prev;
  return p;
}

void write_markers_csv(const std::filesystem::path& path, std::span<const Vec2> markers) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "j,x1,x2\n";
  for (std::size_t j = 0; j < markers.size(); ++j)
    os << fmt::format("{},{:.17g},{:.17g}\n", j + 1, markers[j].x, markers[j].y);
}

MarkerSet read_markers_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  if (line.rfind("j,x1,x2", 0) != 0) throw std::runtime_error(path.string() + ": expected header j,x1,x2");
  MarkerSet m;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    m.positions.push_back({std::stod(line.substr(c1 + 1, c2 - c1 - 1)), std::stod(line.substr(c2 + 1))});
  }
  return m;
}

}  // namespace stirring
