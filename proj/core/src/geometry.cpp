#include "stirring/geometry.hpp"

#include <algorithm>

#include "stirring/errors.hpp"

namespace stirring {

namespace {

struct ExitVisitor {
  Vec2 x;
  double operator()(const UnitSquare&) const {
    const double dx = std::max({0.0, -x.x, x.x - 1.0});
    const double dy = std::max({0.0, -x.y, x.y - 1.0});
    return std::hypot(dx, dy);
  }
  double operator()(const Disc& d) const { return std::max(0.0, norm(x - d.center) - d.radius); }
};

struct ProjectVisitor {
  Vec2 x;
  Vec2 operator()(const UnitSquare&) const {
    return {std::clamp(x.x, 0.0, 1.0), std::clamp(x.y, 0.0, 1.0)};
  }
  Vec2 operator()(const Disc& d) const {
    const Vec2 rel = x - d.center;
    const double r = norm(rel);
    if (r <= d.radius) return x;
    return d.center + (d.radius / r) * rel;
  }
};

}  // namespace

double exit_distance(const Domain& domain, const Vec2& x) {
  return std::visit(ExitVisitor{x}, domain);
}

Vec2 project_into(const Domain& domain, const Vec2& x) {
  return std::visit(ProjectVisitor{x}, domain);
}

const char* domain_name(const Domain& domain) {
  return std::holds_alternative<UnitSquare>(domain) ? "unit_square" : "disc";
}

IntegrationError::IntegrationError(std::size_t step, std::size_t marker, double excess)
    : std::runtime_error("marker " + std::to_string(marker) + " left the domain at step " +
                         std::to_string(step) + " (distance " + std::to_string(excess) +
                         "); reduce the time step"),
      step_(step),
      marker_(marker),
      excess_(excess) {}

}  // namespace stirring
