#pragma once

// Shared test utilities: deterministic random geometry generators and the
// independent oracles the library is checked against (finite-difference
// Christoffels and second fundamental forms, conformal-change formulas, the
// algebraically simplified mass integrand). Everything here is test-only and
// deliberately avoids the implementation paths it cross-checks.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "hypmass/hypmass.hpp"

namespace testsupport {

using namespace hypmass;

inline std::mt19937_64 rng(unsigned long seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Vec3 random_unit(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    const Vec3 v{n(g), n(g), n(g)};
    const double len = norm(v);
    if (len > 1e-3) return v / len;
  }
}

// Convex planar polygon: affine image of a regular point set on a circle,
// placed high enough that every vertex stays in the upper half-space.
inline Face random_face(std::mt19937_64& g, int min_sides = 3, int max_sides = 7) {
  const Vec3 a = random_unit(g);
  const int n = static_cast<int>(uniform(g, min_sides, max_sides + 1 - 1e-12));
  const double r1 = uniform(g, 0.3, 1.2), r2 = uniform(g, 0.3, 1.2);
  const double zc = r1 + r2 + uniform(g, 0.3, 3.0);
  const Vec3 q{uniform(g, -2.0, 2.0), uniform(g, -2.0, 2.0), zc};

  Face f;
  f.id = 0;
  f.plane = Plane(a, dot(a, q));
  // in-plane axes
  Vec3 axis{1, 0, 0};
  if (std::abs(a.x) > 0.8) axis = {0, 1, 0};
  const Vec3 t1 = normalized(axis - dot(axis, a) * a);
  const Vec3 t2 = cross(a, t1);
  const double phase = uniform(g, 0.0, 2.0 * M_PI);
  for (int k = 0; k < n; ++k) {
    const double th = phase + 2.0 * M_PI * k / n;
    const Vec3 v = q + (r1 * std::cos(th)) * t1 + (r2 * std::sin(th)) * t2;
    f.vertex_ids.push_back(k);
    f.vertices.emplace_back(v);
  }
  return f;
}

inline Point random_point_on_face(std::mt19937_64& g, const Face& f) {
  // barycentric blend of the centroid and two consecutive vertices
  const std::size_t n = f.vertices.size();
  const std::size_t i = static_cast<std::size_t>(uniform(g, 0.0, static_cast<double>(n) - 1e-9));
  double w0 = uniform(g, 0.0, 1.0), w1 = uniform(g, 0.0, 1.0), w2 = uniform(g, 0.0, 1.0);
  const double s = w0 + w1 + w2;
  w0 /= s;
  w1 /= s;
  w2 /= s;
  const Vec3 c = f.centroid();
  return Point(w0 * c + w1 * f.vertices[i].vec() + w2 * f.vertices[(i + 1) % n].vec());
}

// Edge between two non-parallel random planes through a shared segment.
inline Edge random_edge(std::mt19937_64& g, double min_sin = 0.1) {
  const Vec3 t = random_unit(g);
  Vec3 axis{1, 0, 0};
  if (std::abs(t.x) > 0.8) axis = {0, 1, 0};
  const Vec3 n1 = normalized(axis - dot(axis, t) * t);
  const Vec3 n2 = cross(t, n1);
  double psiA, psiB;
  while (true) {
    psiA = uniform(g, 0.0, 2.0 * M_PI);
    psiB = uniform(g, 0.0, 2.0 * M_PI);
    const double c = std::cos(psiA - psiB);
    if (std::abs(c) < 1.0 - min_sin && std::sqrt(1.0 - c * c) >= min_sin) break;
  }
  const double len = uniform(g, 0.4, 1.5);
  const double zc = len + uniform(g, 0.3, 3.0);
  const Vec3 q{uniform(g, -2.0, 2.0), uniform(g, -2.0, 2.0), zc};
  Edge e;
  e.id = 0;
  e.a = Point(q - 0.5 * len * t);
  e.b = Point(q + 0.5 * len * t);
  e.normal_a = std::cos(psiA) * n1 + std::sin(psiA) * n2;
  e.normal_b = std::cos(psiB) * n1 + std::sin(psiB) * n2;
  return e;
}

// ---------------------------------------------------------------------------
// Oracles

// Christoffel symbols of an arbitrary metric given by components, via central
// finite differences of g_ij.
inline Christoffel3 fd_christoffel(const std::function<Sym3(const Point&)>& metric,
                                   const Point& p, double h = 1e-6) {
  std::array<Sym3, 3> dg;
  for (int k = 0; k < 3; ++k) {
    Vec3 dp{};
    dp[k] = h;
    dg[k] = (1.0 / (2.0 * h)) * (metric(Point(p.vec() + dp)) - metric(Point(p.vec() - dp)));
  }
  const Sym3 ginv = inverse(metric(p));
  Christoffel3 c;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l)
          s += ginv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        c.G[k][i][j] = 0.5 * s;
      }
  return c;
}

// Second fundamental form of the face under b by numerically differentiating
// the normal field nu_bar along the face: A(Y,Z) = b(nabla_Y nu_bar, Z).
inline Sym2 fd_second_fundamental_form(const Face& f, const Point& p, double h = 1e-6) {
  const FaceFrame fr = face_frame(f);
  const Vec3 t[2] = {fr.t1, fr.t2};
  Sym2 A;
  double vals[2][2];
  for (int al = 0; al < 2; ++al) {
    const Vec3 nup = outward_normal_bar(f, Point(p.vec() + h * t[al]));
    const Vec3 num = outward_normal_bar(f, Point(p.vec() - h * t[al]));
    const Vec3 dnu = (nup - num) / (2.0 * h);
    const Vec3 nu = outward_normal_bar(f, p);
    const Christoffel3 gam = christoffel_bar(p);
    Vec3 cov = dnu;
    for (int k = 0; k < 3; ++k) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += gam.G[k][i][j] * t[al][i] * nu[j];
      cov[k] += s;
    }
    const Sym3 b = metric_bar(p);
    for (int be = 0; be < 2; ++be) vals[al][be] = quad_form(b, cov, t[be]);
  }
  A.a11 = vals[0][0];
  A.a12 = 0.5 * (vals[0][1] + vals[1][0]);
  A.a22 = vals[1][1];
  return A;
}

// Conformal-change oracle for the mean curvature of a face under
// g = (1 + phi) b: H = (1+phi)^(-1/2) (H_bar + (1+phi)^(-1) d_nu phi).
inline double conformal_mean_curvature(const Face& f, const Point& p, double phi,
                                       const Vec3& grad_phi_euclidean) {
  const double Hbar = background_mean_curvature(f);
  const double dnuphi = p.x3 * dot(f.plane.normal, grad_phi_euclidean);
  return (Hbar + dnuphi / (1.0 + phi)) / std::sqrt(1.0 + phi);
}

// Euclidean gradient of phi = m cosh^(-tp) r for the conformal family.
inline Vec3 conformal_phi_gradient(const Point& p, double m, double tp) {
  const double C = cosh_distance(p);
  const double z = p.x3;
  const Vec3 dC{p.x1 / z, p.x2 / z, (z * z - p.x1 * p.x1 - p.x2 * p.x2 - 1.0) / (2.0 * z * z)};
  return (-tp * m * std::pow(C, -tp - 1.0)) * dC;
}

// Algebraically simplified mass integrand, derived by expanding the
// covariant terms of U in half-space coordinates:
//   U_j = x3 sum_i (d_i e_ij - d_j e_ii) - 2 delta_j3 sum_i e_ii.
inline Vec3 simplified_U(const SymTensor2& e, const std::array<SymTensor2, 3>& de,
                         const Point& p) {
  Vec3 U{};
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += de[i](i, j) - de[j](i, i);
    U[j] = p.x3 * s;
  }
  U.z -= 2.0 * trace(e);
  return U;
}

// exact integral of x^a y^b over the unit simplex {x,y>=0, x+y<=1}
inline double simplex_monomial(int a, int b) {
  auto fact = [](int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

// Tilted unit rectangle with height profile z = z0 + beta*v, v in [0,1]:
// exact integral of x3^-2 against the Euclidean area element.
struct TiltedRectangle {
  Face face;
  double exact_x3m2;  // integral of x3^-2 dA
};

inline TiltedRectangle tilted_rectangle(double z0, double beta) {
  const Vec3 s1{1.0, 0.0, 0.0};
  const Vec3 s2{0.0, 1.0 / std::sqrt(1.0 + beta * beta), beta / std::sqrt(1.0 + beta * beta)};
  const Vec3 origin{0.0, 0.0, z0};
  Face f;
  f.id = 0;
  const Vec3 a = normalized(cross(s1, s2));
  f.plane = Plane(a, dot(a, origin));
  const double L = std::sqrt(1.0 + beta * beta);  // side length so that z spans beta
  std::vector<Vec3> vs = {origin, origin + s1, origin + s1 + L * s2, origin + L * s2};
  for (int i = 0; i < 4; ++i) {
    f.vertex_ids.push_back(i);
    f.vertices.emplace_back(vs[i]);
  }
  TiltedRectangle tr;
  tr.face = f;
  // z(v) = z0 + beta v with v in [0,1]; dA = L dv du, integral =
  // L * (1/(z0(z0+beta))) ... via antiderivative -1/(beta) [1/z]:
  tr.exact_x3m2 = (std::abs(beta) < 1e-14)
                      ? L / (z0 * z0)
                      : L * (1.0 / z0 - 1.0 / (z0 + beta)) / beta;
  return tr;
}

// Three-point Richardson estimate of f(m) ~ f0 + c m: returns the deviation
// ratio |d1 - d2| / |d2 - d3| for difference quotients at m, m/2, m/4, which
// tends to 2 when the remainder is O(m^2).
inline double richardson_ratio(const std::function<double(double)>& f, double m) {
  const double d1 = f(m) / m;
  const double d2 = f(m / 2) / (m / 2);
  const double d3 = f(m / 4) / (m / 4);
  return std::abs(d1 - d2) / std::abs(d2 - d3);
}

}  // namespace testsupport
