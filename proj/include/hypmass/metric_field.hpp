#pragma once

// The metric perturbation e with g = b + e: evaluation, first derivatives
// (analytic when the family provides them, central finite differences
// otherwise), background Christoffel symbols, covariant trace/divergence,
// built-in test families, and decay verification against e^(-tau r).
//
// Tensors are stored with lowered Euclidean-coordinate indices; any index
// raising goes explicitly through b. The scaled view eps_ij = (x3)^2 e_ij
// is what all norms reduce to: |e|_b^2 = sum_ij eps_ij^2.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypmass/geometry.hpp"
#include "hypmass/halfspace.hpp"

namespace hypmass {

using SymTensor2 = Sym3;

// Gamma^k_ij of b = x3^-2 delta; G[k][i][j], symmetric in (i,j).
struct Christoffel3 {
  double G[3][3][3] = {};
};

inline Christoffel3 christoffel_bar(const Point& p) {
  const double w = 1.0 / p.x3;
  Christoffel3 c;
  c.G[2][0][0] = w;   // Gamma^3_11
  c.G[2][1][1] = w;   // Gamma^3_22
  c.G[2][2][2] = -w;  // Gamma^3_33
  c.G[0][0][2] = c.G[0][2][0] = -w;  // Gamma^1_13
  c.G[1][1][2] = c.G[1][2][1] = -w;  // Gamma^2_23
  return c;
}

struct MetricField {
  std::string name;
  double tau = 3.0;  // declared decay rate, > 3/2
  std::function<SymTensor2(const Point&)> eval;
  std::function<std::array<SymTensor2, 3>(const Point&)> partials;  // optional

  bool has_analytic_partials() const { return static_cast<bool>(partials); }
};

// e at p, with a lazy positive-definiteness check of g = b + e via the
// Euclidean-scaled matrix x3^2 g = I + eps (smallest eigenvalue > 1e-10).
inline SymTensor2 evaluate_e(const MetricField& field, const Point& p) {
  const SymTensor2 e = field.eval(p);
  const double z2 = p.x3 * p.x3;
  const Sym3 scaled = Sym3::identity() + z2 * e;
  if (!positive_definite_shifted(scaled, 1e-10))
    throw std::domain_error("evaluate_e: g = b + e not positive definite at (" +
                            std::to_string(p.x1) + "," + std::to_string(p.x2) + "," +
                            std::to_string(p.x3) + ")");
  return e;
}

// d_k e_ij. Finite-difference step scales with x3 because coordinate
// derivatives of decaying fields blow up in b-norm near x3 -> 0; the vertical
// step is clamped so sample points stay in the upper half-space.
inline std::array<SymTensor2, 3> evaluate_de(const MetricField& field, const Point& p) {
  if (field.has_analytic_partials()) return field.partials(p);
  std::array<SymTensor2, 3> d;
  const double h0 = 1e-5 * std::max(1.0, p.x3);
  for (int k = 0; k < 3; ++k) {
    double h = h0;
    if (k == 2) h = std::min(h, 0.5 * p.x3);
    Vec3 dp{};
    dp[k] = h;
    const SymTensor2 ep = field.eval(Point(p.vec() + dp));
    const SymTensor2 em = field.eval(Point(p.vec() - dp));
    d[k] = (1.0 / (2.0 * h)) * (ep - em);
  }
  return d;
}

inline double trace_b_e(const SymTensor2& e, const Point& p) {
  return p.x3 * p.x3 * trace(e);
}

inline double trace_b_e(const MetricField& field, const Point& p) {
  return trace_b_e(evaluate_e(field, p), p);
}

// (div_b e)_j = b^{ik} (d_i e_kj - Gamma^l_ik e_lj - Gamma^l_ij e_kl).
inline Vec3 div_b_e(const SymTensor2& e, const std::array<SymTensor2, 3>& de, const Point& p) {
  const Christoffel3 gam = christoffel_bar(p);
  const double z2 = p.x3 * p.x3;
  Vec3 out{};
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      double t = de[i](i, j);
      for (int l = 0; l < 3; ++l) t -= gam.G[l][i][i] * e(l, j) + gam.G[l][i][j] * e(i, l);
      s += t;
    }
    out[j] = z2 * s;
  }
  return out;
}

inline Vec3 div_b_e(const MetricField& field, const Point& p) {
  return div_b_e(evaluate_e(field, p), evaluate_de(field, p), p);
}

// |e|_b via the scaled components.
inline double norm_b(const SymTensor2& e, const Point& p) {
  return frobenius(p.x3 * p.x3 * e);
}

// |nabla_bar e|_b.
inline double norm_b_nabla(const SymTensor2& e, const std::array<SymTensor2, 3>& de,
                           const Point& p) {
  const Christoffel3 gam = christoffel_bar(p);
  double s = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double t = de[k](i, j);
        for (int l = 0; l < 3; ++l) t -= gam.G[l][k][i] * e(l, j) + gam.G[l][k][j] * e(i, l);
        s += t * t;
      }
  const double z2 = p.x3 * p.x3;
  return std::sqrt(z2 * z2 * z2 * s);
}

inline MetricField scaled_field(const MetricField& f, double m) {
  MetricField out;
  out.name = f.name + "*" + std::to_string(m);
  out.tau = f.tau;
  auto eval = f.eval;
  out.eval = [eval, m](const Point& p) { return m * eval(p); };
  if (f.has_analytic_partials()) {
    auto parts = f.partials;
    out.partials = [parts, m](const Point& p) {
      auto d = parts(p);
      for (auto& t : d) t = m * t;
      return d;
    };
  }
  return out;
}

struct FamilyParams {
  double m = 1.0;
  double tau_prime = 3.0;        // conformal / anisotropic decay exponent
  Vec3 center{0.0, 0.0, 2.0};    // bump support center
  double radius = 0.75;          // bump support radius
  Vec3 diag{1.0, 0.7, 0.4};      // anisotropic diagonal
};

namespace detail {

// Euclidean-coordinate gradient of cosh r (from the distance formula).
inline Vec3 grad_cosh_r(const Point& p) {
  const double z = p.x3;
  return {p.x1 / z, p.x2 / z, (z * z - p.x1 * p.x1 - p.x2 * p.x2 - 1.0) / (2.0 * z * z)};
}

}  // namespace detail

// Families: "zero"; "conformal" e = m cosh^-tau'(r) b; "bump" e = psi b with
// a C^2 compactly supported cutoff; "anisotropic" e_ij = m cosh^-tau'(r)
// x3^-2 D_ij. All carry analytic partials.
inline MetricField builtin_family(const std::string& name, const FamilyParams& params = {}) {
  MetricField f;
  f.name = name;
  if (name == "zero") {
    f.tau = 3.0;
    f.eval = [](const Point&) { return SymTensor2::zero(); };
    f.partials = [](const Point&) { return std::array<SymTensor2, 3>{}; };
    return f;
  }
  if (name == "conformal" || name == "anisotropic") {
    const double tp = params.tau_prime;
    if (!(tp > 1.5))
      throw std::invalid_argument("builtin_family: tau_prime must exceed 3/2");
    if (tp > 6.0)
      throw std::invalid_argument("builtin_family: tau_prime above 6 not supported");
    const double m = params.m;
    const Vec3 D = (name == "conformal") ? Vec3{1.0, 1.0, 1.0} : params.diag;
    f.tau = tp;
    f.eval = [m, tp, D](const Point& p) {
      const double w = m * std::pow(cosh_distance(p), -tp) / (p.x3 * p.x3);
      SymTensor2 e;
      e.xx = w * D.x;
      e.yy = w * D.y;
      e.zz = w * D.z;
      return e;
    };
    f.partials = [m, tp, D](const Point& p) {
      const double C = cosh_distance(p);
      const Vec3 dC = detail::grad_cosh_r(p);
      const double z = p.x3;
      std::array<SymTensor2, 3> d{};
      for (int k = 0; k < 3; ++k) {
        double w = -tp * std::pow(C, -tp - 1.0) * dC[k] / (z * z);
        if (k == 2) w -= 2.0 * std::pow(C, -tp) / (z * z * z);
        w *= m;
        d[k].xx = w * D.x;
        d[k].yy = w * D.y;
        d[k].zz = w * D.z;
      }
      return d;
    };
    return f;
  }
  if (name == "bump") {
    const double m = params.m;
    const Vec3 c = params.center;
    const double R = params.radius;
    if (!(c.z - R > 0.0))
      throw std::invalid_argument("builtin_family: bump support leaves the upper half-space");
    f.tau = 4.0;  // any tau is valid for a compactly supported field
    auto psi = [m, c, R](const Point& p) {
      const Vec3 q = p.vec() - c;
      const double t = dot(q, q) / (R * R);
      if (t >= 1.0) return 0.0;
      const double u = 1.0 - t;
      return m * u * u * u;
    };
    auto dpsi = [m, c, R](const Point& p) -> Vec3 {
      const Vec3 q = p.vec() - c;
      const double t = dot(q, q) / (R * R);
      if (t >= 1.0) return {};
      const double u = 1.0 - t;
      return (-6.0 * m * u * u / (R * R)) * q;
    };
    f.eval = [psi](const Point& p) {
      const double w = psi(p) / (p.x3 * p.x3);
      return SymTensor2{w, 0, 0, w, 0, w};
    };
    f.partials = [psi, dpsi](const Point& p) {
      const double z = p.x3;
      const double ps = psi(p);
      const Vec3 dp = dpsi(p);
      std::array<SymTensor2, 3> d{};
      for (int k = 0; k < 3; ++k) {
        double w = dp[k] / (z * z);
        if (k == 2) w -= 2.0 * ps / (z * z * z);
        d[k].xx = d[k].yy = d[k].zz = w;
      }
      return d;
    };
    return f;
  }
  throw std::invalid_argument("builtin_family: unknown family '" + name + "'");
}

struct DecayReport {
  std::vector<double> radii;
  std::vector<double> sup_e;       // sup |e|_b e^(tau r) per radius
  std::vector<double> sup_de;      // sup |nabla_bar e|_b e^(tau r)
  std::vector<double> sup_scaled;  // sup of the combined quantity, drives pass/fail
  std::vector<double> ratio;       // sup_scaled[i] / sup_scaled[i-1], 1 for the first entry
  bool second_order_checked = false;
  bool pass = false;
};

namespace detail {

// Point of the geodesic sphere of radius r about o at hyperbolic polar
// cosine u and azimuth phi (the chart the flux quadrature uses as well).
inline Point sphere_point(double r, double u, double phi) {
  const double c = std::cosh(r), s = std::sinh(r);
  const double z = 1.0 / (c - s * u);
  const double ue = (z - c) / s;
  const double we = std::sqrt(std::max(0.0, 1.0 - ue * ue));
  return Point(s * we * std::cos(phi), s * we * std::sin(phi), z);
}

// |nabla nabla e|_b with the first covariant derivative differentiated by
// finite differences; only meaningful when analytic first partials exist.
inline double norm_b_nabla2_fd(const MetricField& field, const Point& p) {
  auto cov1 = [&field](const Point& q) {
    const SymTensor2 e = field.eval(q);
    const auto de = field.partials(q);
    const Christoffel3 gam = christoffel_bar(q);
    std::array<std::array<std::array<double, 3>, 3>, 3> T{};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double t = de[k](i, j);
          for (int l = 0; l < 3; ++l) t -= gam.G[l][k][i] * e(l, j) + gam.G[l][k][j] * e(i, l);
          T[k][i][j] = t;
        }
    return T;
  };
  using Rank3 = std::array<std::array<std::array<double, 3>, 3>, 3>;
  const Rank3 T0 = cov1(p);
  const Christoffel3 gam = christoffel_bar(p);
  const double h0 = 1e-5 * std::max(1.0, p.x3);
  std::array<Rank3, 3> dT;
  for (int l = 0; l < 3; ++l) {
    double h = h0;
    if (l == 2) h = std::min(h, 0.5 * p.x3);
    Vec3 dp{};
    dp[l] = h;
    const auto Tp = cov1(Point(p.vec() + dp));
    const auto Tm = cov1(Point(p.vec() - dp));
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dT[l][k][i][j] = (Tp[k][i][j] - Tm[k][i][j]) / (2.0 * h);
  }
  double s = 0.0;
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double t = dT[l][k][i][j];
          for (int mIdx = 0; mIdx < 3; ++mIdx)
            t -= gam.G[mIdx][l][k] * T0[mIdx][i][j] + gam.G[mIdx][l][i] * T0[k][mIdx][j] +
                 gam.G[mIdx][l][j] * T0[k][i][mIdx];
          s += t * t;
        }
  const double z2 = p.x3 * p.x3;
  return std::sqrt(z2 * z2 * z2 * z2 * s);
}

}  // namespace detail

// Samples geodesic spheres about o and reports sup of the scaled decay
// quantity per radius. Pass rule: the sequence never grows by more than a
// factor 2 over any earlier value.
inline DecayReport decay_check(const MetricField& field, const std::vector<double>& radii,
                               int n_polar = 24, int n_azimuth = 48) {
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1]))
      throw std::invalid_argument("decay_check: radii must be strictly increasing");
  DecayReport rep;
  rep.radii = radii;
  rep.second_order_checked = field.has_analytic_partials();
  for (double r : radii) {
    double sup = 0.0, sup_e = 0.0, sup_de = 0.0;
    const double scale = std::exp(field.tau * r);
    for (int i = 0; i < n_polar; ++i) {
      const double u = -1.0 + (2.0 * i + 1.0) / n_polar;
      for (int j = 0; j < n_azimuth; ++j) {
        const double phi = 2.0 * M_PI * (j + 0.5) / n_azimuth;
        const Point p = detail::sphere_point(r, u, phi);
        const SymTensor2 e = evaluate_e(field, p);
        const auto de = evaluate_de(field, p);
        const double qe = norm_b(e, p);
        const double qde = norm_b_nabla(e, de, p);
        double q = qe + qde;
        if (rep.second_order_checked && i % 8 == 0 && j % 16 == 0)
          q += detail::norm_b_nabla2_fd(field, p);
        sup_e = std::max(sup_e, qe * scale);
        sup_de = std::max(sup_de, qde * scale);
        sup = std::max(sup, q * scale);
      }
    }
    rep.sup_e.push_back(sup_e);
    rep.sup_de.push_back(sup_de);
    rep.sup_scaled.push_back(sup);
    rep.ratio.push_back(rep.sup_scaled.size() == 1
                            ? 1.0
                            : sup / std::max(rep.sup_scaled[rep.sup_scaled.size() - 2], 1e-300));
  }
  rep.pass = true;
  for (std::size_t i = 0; i < rep.sup_scaled.size() && rep.pass; ++i)
    for (std::size_t j = i + 1; j < rep.sup_scaled.size(); ++j)
      if (rep.sup_scaled[j] > 2.0 * rep.sup_scaled[i] + 1e-300) {
        rep.pass = false;
        break;
      }
  return rep;
}

}  // namespace hypmass
