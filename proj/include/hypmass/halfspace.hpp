#pragma once

// Background geometry of the upper half-space model of hyperbolic 3-space:
//   b = (x3)^-2 (dx1^2 + dx2^2 + dx3^2)  on  {x3 > 0},
// base point o = (0,0,1), static potential V = 1/x3. All formulas here are
// exact closed forms.

#include <cmath>
#include <stdexcept>
#include <string>

#include "hypmass/geometry.hpp"

namespace hypmass {

// A location in the open upper half-space. Construction rejects x3 <= 0.
struct Point {
  double x1 = 0.0, x2 = 0.0, x3 = 1.0;

  Point() = default;
  Point(double a, double b, double c) : x1(a), x2(b), x3(c) {
    if (!(x3 > 0.0))
      throw std::invalid_argument("Point: nonpositive height x3 = " + std::to_string(c));
  }
  explicit Point(const Vec3& v) : Point(v.x, v.y, v.z) {}

  Vec3 vec() const { return {x1, x2, x3}; }
};

// Euclidean plane {p : dot(normal, p) = offset} with unit normal.
struct Plane {
  Vec3 normal;
  double offset = 0.0;

  Plane() = default;
  Plane(const Vec3& n, double d) : normal(n), offset(d) {
    if (std::abs(norm(n) - 1.0) > 1e-14)
      throw std::invalid_argument("Plane: normal is not unit length");
  }
};

// cosh of the hyperbolic distance from p to o = (0,0,1):
//   2 cosh r = (x1^2 + x2^2 + x3^2 + 1) / x3.
inline double cosh_distance(const Point& p) {
  return 0.5 * (p.x1 * p.x1 + p.x2 * p.x2 + p.x3 * p.x3 + 1.0) / p.x3;
}

inline double geodesic_distance(const Point& p) {
  return std::acosh(std::max(1.0, cosh_distance(p)));
}

// V = 1/x3.
inline double static_potential(const Point& p) { return 1.0 / p.x3; }

// Euclidean-coordinate components of dV (a covector): (0, 0, -1/x3^2).
inline Vec3 static_potential_differential(const Point& p) {
  return {0.0, 0.0, -1.0 / (p.x3 * p.x3)};
}

// The b-gradient of V has constant Euclidean components (0,0,-1).
inline Vec3 static_potential_gradient_bar() { return {0.0, 0.0, -1.0}; }

// Metric components b_ij = x3^-2 delta_ij and inverse b^ij = x3^2 delta^ij.
inline Sym3 metric_bar(const Point& p) {
  const double w = 1.0 / (p.x3 * p.x3);
  return {w, 0, 0, w, 0, w};
}

inline Sym3 metric_bar_inverse(const Point& p) {
  const double w = p.x3 * p.x3;
  return {w, 0, 0, w, 0, w};
}

inline double norm_bar(const Point& p, const Vec3& v) {
  return norm(v) / p.x3;
}

}  // namespace hypmass
