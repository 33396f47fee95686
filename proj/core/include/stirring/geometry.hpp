#pragma once

#include <cmath>
#include <variant>

namespace stirring {

/// Point or displacement in the plane.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr Vec2 midpoint(const Vec2& a, const Vec2& b) { return 0.5 * (a + b); }

/// 2x2 matrix, row-major: [[xx, xy], [yx, yy]]. For a velocity gradient,
/// entry (i, j) is d v_i / d x_j.
struct Mat2 {
  double xx = 0.0, xy = 0.0;
  double yx = 0.0, yy = 0.0;

  constexpr Mat2& operator+=(const Mat2& o) {
    xx += o.xx;
    xy += o.xy;
    yx += o.yx;
    yy += o.yy;
    return *this;
  }
  constexpr Mat2& operator*=(double s) {
    xx *= s;
    xy *= s;
    yx *= s;
    yy *= s;
    return *this;
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
constexpr Mat2 operator*(double s, Mat2 a) { return a *= s; }
constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m.xx * v.x + m.xy * v.y, m.yx * v.x + m.yy * v.y};
}
constexpr Mat2 transpose(const Mat2& m) { return {m.xx, m.yx, m.xy, m.yy}; }
constexpr double trace(const Mat2& m) { return m.xx + m.yy; }
constexpr double det(const Mat2& m) { return m.xx * m.yy - m.xy * m.yx; }

/// Solves m * x = rhs by Cramer's rule. Caller guarantees m is nonsingular.
constexpr Vec2 solve(const Mat2& m, const Vec2& rhs) {
  const double d = det(m);
  return {(m.yy * rhs.x - m.xy * rhs.y) / d, (m.xx * rhs.y - m.yx * rhs.x) / d};
}

/// Rotation by +90 degrees, J = [[0, -1], [1, 0]].
constexpr Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

struct UnitSquare {};

struct Disc {
  Vec2 center{0.5, 0.5};
  double radius = 0.5;
};

using Domain = std::variant<UnitSquare, Disc>;

/// Euclidean distance by which x lies outside the closed domain (0 inside).
double exit_distance(const Domain& domain, const Vec2& x);

/// Nearest point of the closed domain.
Vec2 project_into(const Domain& domain, const Vec2& x);

inline bool contains(const Domain& domain, const Vec2& x, double tol = 1e-9) {
  return exit_distance(domain, x) <= tol;
}

const char* domain_name(const Domain& domain);

}  // namespace stirring
