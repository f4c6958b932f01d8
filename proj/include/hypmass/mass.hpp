#pragma once

// The hyperbolic mass machinery: the mass integrand U, boundary fluxes over
// polyhedra and geodesic spheres, both sides of the polyhedral mass formula
// (mean-curvature deficit + dihedral-angle deficit), the per-face expansion
// residual, and the cosh^(-2 tau + 1) error-term integrals.
//
// Measures: d sigma_bar = x3^-2 dA and d lambda_bar = x3^-1 dl; integrands
// below fold these weights in before handing off to the quadrature engine.
// The mass value is the raw flux, no 1/(16 pi)-type normalization.

#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hypmass/metric_field.hpp"
#include "hypmass/polyhedron.hpp"
#include "hypmass/quadrature.hpp"
#include "hypmass/surface_geometry.hpp"

namespace hypmass {

// U = V div e - V d(tr_b e) + tr_b e dV - e(grad_bar V, .), a covector in
// Euclidean coordinate components; exactly linear in the field.
inline Vec3 mass_integrand_U(const MetricField& field, const Point& p) {
  const SymTensor2 e = evaluate_e(field, p);
  const auto de = evaluate_de(field, p);
  const double V = static_potential(p);
  const double z = p.x3;
  const double z2 = z * z;

  const Vec3 dive = div_b_e(e, de, p);
  const double tr = trace_b_e(e, p);
  Vec3 dtr;  // d_j (tr_b e) = z^2 sum_i d_j e_ii + 2 z delta_j3 tr_delta e
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += de[j](i, i);
    dtr[j] = z2 * s;
  }
  dtr.z += 2.0 * z * trace(e);

  const Vec3 dV = static_potential_differential(p);
  const Vec3 gradV = static_potential_gradient_bar();
  Vec3 U;
  for (int j = 0; j < 3; ++j) {
    double egradV = 0.0;
    for (int i = 0; i < 3; ++i) egradV += e(i, j) * gradV[i];
    U[j] = V * dive[j] - V * dtr[j] + tr * dV[j] - egradV;
  }
  return U;
}

// U(nu_bar) at a point of a face: U_i nu^i with nu_bar = x3 a.
inline double mass_flux_density(const MetricField& field, const Face& f, const Point& p) {
  return p.x3 * dot(mass_integrand_U(field, p), f.plane.normal);
}

// Integral of U(nu_bar) d sigma_bar over the face.
inline IntegralResult face_flux(const MetricField& field, const Face& f,
                                const QuadratureSpec& spec) {
  return integrate_face(
      f,
      [&field, &f](const Point& p) {
        return mass_flux_density(field, f, p) / (p.x3 * p.x3);
      },
      spec);
}

struct MassBreakdown {
  double flux_total = 0.0;
  std::map<int, double> per_face_flux;
  double mean_curv_term = 0.0;   // - int 2 V (H - H_bar) d sigma_bar
  double angle_term = 0.0;       // 2 int V (alpha - alpha_bar) d lambda_bar
  double face_error_bound = 0.0; // int cosh^(-2 tau + 1) r d sigma_bar
  double edge_error_bound = 0.0; // int cosh^(-2 tau + 1) r d lambda_bar
  double residual = 0.0;         // flux_total - mean_curv_term - angle_term
  double quad_error = 0.0;
  int max_refinement_depth = 0;
  long evaluations = 0;
  bool converged = true;

  double error_bound_sum() const { return face_error_bound + edge_error_bound; }
};

namespace detail {

// Runs work items 0..n-1 on up to `threads` workers; results are stored by
// index so the reduction order downstream is fixed regardless of scheduling.
template <typename Fn>
inline void parallel_items(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

inline void absorb(MassBreakdown& b, const IntegralResult& r) {
  b.quad_error += r.error_estimate;
  b.max_refinement_depth = std::max(b.max_refinement_depth, r.depth);
  b.evaluations += r.evaluations;
  b.converged = b.converged && r.converged;
}

}  // namespace detail

// Flux side: sums face fluxes of U(nu_bar) over the boundary.
inline MassBreakdown polyhedral_mass(const MetricField& field, const Polyhedron& poly,
                                     const QuadratureSpec& spec, int threads = 1) {
  MassBreakdown b;
  std::vector<IntegralResult> per_face(poly.faces.size());
  detail::parallel_items(static_cast<int>(poly.faces.size()), threads,
                         [&](int i) { per_face[i] = face_flux(field, poly.faces[i], spec); });
  for (std::size_t i = 0; i < poly.faces.size(); ++i) {
    b.per_face_flux[poly.faces[i].id] = per_face[i].value;
    b.flux_total += per_face[i].value;
    detail::absorb(b, per_face[i]);
  }
  b.residual = b.flux_total;
  return b;
}

// Reference oracle: flux through the geodesic sphere of radius r about o,
// realized as the Euclidean sphere of center (0,0,cosh r) and radius sinh r.
// Tensor-product rule in hyperbolic spherical angles about o: Gauss-Legendre
// in the geodesic polar cosine u, uniform azimuth, with the exact area
// element dsigma_bar = sinh^2 r dOmega. In these angles the height is
// z = 1/(cosh r - u sinh r), so the integrand has no boundary layer at the
// bottom pole.
inline double sphere_mass(const MetricField& field, double r, int n_polar = 128,
                          int n_azimuth = 256) {
  if (!(r > 0.0)) throw std::invalid_argument("sphere_mass: radius must be positive");
  const double c = std::cosh(r), s = std::sinh(r);
  const auto& gl = quadrule::gauss_legendre(n_polar);
  double total = 0.0;
  for (const auto& [u, wu] : gl) {
    const double z = 1.0 / (c - s * u);
    const double ue = (z - c) / s;  // Euclidean polar cosine of the same point
    const double we = std::sqrt(std::max(0.0, 1.0 - ue * ue));
    double ring = 0.0;
    for (int j = 0; j < n_azimuth; ++j) {
      const double phi = 2.0 * M_PI * (j + 0.5) / n_azimuth;
      const Point p(s * we * std::cos(phi), s * we * std::sin(phi), z);
      const Vec3 n_euc{we * std::cos(phi), we * std::sin(phi), ue};
      // U(nu_bar) dsigma_bar = (z U.n) s^2 du dphi
      ring += dot(mass_integrand_U(field, p), n_euc) * p.x3;
    }
    total += wu * ring * (2.0 * M_PI / n_azimuth) * s * s;
  }
  return total;
}

// Geometry side: mean-curvature deficit over faces, dihedral-angle deficit
// over edges, and the cosh^(-2 tau + 1) error-term integrals with tau taken
// from the field's declared decay.
inline MassBreakdown theorem_rhs(const MetricField& field, const Polyhedron& poly,
                                 const QuadratureSpec& spec, int threads = 1) {
  MassBreakdown b;
  const double tau = field.tau;
  const int nf = static_cast<int>(poly.faces.size());
  const int ne = static_cast<int>(poly.edges.size());

  std::vector<IntegralResult> mc(nf), fb(nf), ang(ne), eb(ne);
  detail::parallel_items(nf + ne, threads, [&](int item) {
    if (item < nf) {
      const Face& f = poly.faces[item];
      mc[item] = integrate_face(
          f,
          [&](const Point& p) {
            const MetricEval ev = metric_eval(field, p);
            const double H = mean_curvature_g(ev, f);
            const double Hbar = background_mean_curvature(f);
            return -2.0 * static_potential(p) * (H - Hbar) / (p.x3 * p.x3);
          },
          spec);
      fb[item] = integrate_face(
          f,
          [&](const Point& p) {
            return std::pow(cosh_distance(p), -2.0 * tau + 1.0) / (p.x3 * p.x3);
          },
          spec);
    } else {
      const Edge& e = poly.edges[item - nf];
      ang[item - nf] = integrate_edge(
          e,
          [&](const Point& p) {
            const MetricEval ev = metric_eval(field, p);
            const double alpha = dihedral_angle_g(ev, e);
            const double alpha_bar = background_dihedral_angle(e);
            return 2.0 * static_potential(p) * (alpha - alpha_bar) / p.x3;
          },
          spec);
      eb[item - nf] = integrate_edge(
          e,
          [&](const Point& p) {
            return std::pow(cosh_distance(p), -2.0 * tau + 1.0) / p.x3;
          },
          spec);
    }
  });
  for (int i = 0; i < nf; ++i) {
    b.mean_curv_term += mc[i].value;
    b.face_error_bound += fb[i].value;
    detail::absorb(b, mc[i]);
    detail::absorb(b, fb[i]);
  }
  for (int i = 0; i < ne; ++i) {
    b.angle_term += ang[i].value;
    b.edge_error_bound += eb[i].value;
    detail::absorb(b, ang[i]);
    detail::absorb(b, eb[i]);
  }
  b.residual = -(b.mean_curv_term + b.angle_term);
  return b;
}

// Both sides at once; residual = flux - mean_curv_term - angle_term.
inline MassBreakdown evaluate_theorem(const MetricField& field, const Polyhedron& poly,
                                      const QuadratureSpec& spec, int threads = 1) {
  const MassBreakdown flux = polyhedral_mass(field, poly, spec, threads);
  MassBreakdown b = theorem_rhs(field, poly, spec, threads);
  b.flux_total = flux.flux_total;
  b.per_face_flux = flux.per_face_flux;
  b.quad_error += flux.quad_error;
  b.max_refinement_depth = std::max(b.max_refinement_depth, flux.max_refinement_depth);
  b.evaluations += flux.evaluations;
  b.converged = b.converged && flux.converged;
  b.residual = b.flux_total - b.mean_curv_term - b.angle_term;
  return b;
}

// | int_F 2V(H - H_bar) dsigma + int_F U(nu_bar) dsigma
//   + int_dF V e(nu_bar, n_bar) dlambda |
// which the mean-curvature expansion bounds by O(|e|^2) cosh-decay terms.
inline double face_identity_residual(const MetricField& field, const Polyhedron& poly,
                                     int face_id, const QuadratureSpec& spec) {
  const Face& f = poly.faces[face_id];
  const IntegralResult hterm = integrate_face(
      f,
      [&](const Point& p) {
        const MetricEval ev = metric_eval(field, p);
        return 2.0 * static_potential(p) *
               (mean_curvature_g(ev, f) - background_mean_curvature(f)) / (p.x3 * p.x3);
      },
      spec);
  const IntegralResult uterm = face_flux(field, f, spec);
  double boundary = 0.0;
  for (const Edge& e : poly.edges) {
    if (e.face_a != face_id && e.face_b != face_id) continue;
    boundary += integrate_edge(
                    e,
                    [&](const Point& p) {
                      const MetricEval ev = metric_eval(field, p);
                      return static_potential(p) * e_nu_conormal(ev, f, e) / p.x3;
                    },
                    spec)
                    .value;
  }
  return std::abs(hterm.value + uterm.value + boundary);
}

// Error-term integrals of cosh^(-2 tau + 1) r.
inline IntegralResult error_integral_face(const Face& f, double tau,
                                          const QuadratureSpec& spec) {
  if (!(tau > 1.5)) throw std::invalid_argument("error_integral_face: tau must exceed 3/2");
  return integrate_face(
      f,
      [tau](const Point& p) {
        return std::pow(cosh_distance(p), -2.0 * tau + 1.0) / (p.x3 * p.x3);
      },
      spec);
}

inline IntegralResult error_integral_edge(const Vec3& p0, const Vec3& p1, double tau,
                                          const QuadratureSpec& spec) {
  if (!(tau > 1.5)) throw std::invalid_argument("error_integral_edge: tau must exceed 3/2");
  return integrate_edge(
      p0, p1,
      [tau](const Point& p) {
        return std::pow(cosh_distance(p), -2.0 * tau + 1.0) / p.x3;
      },
      spec);
}

inline IntegralResult error_integral_edge(const Edge& e, double tau,
                                          const QuadratureSpec& spec) {
  return error_integral_edge(e.a.vec(), e.b.vec(), tau, spec);
}

// Whole-boundary variants: summed over all faces / all edges in id order.
inline IntegralResult error_integral_face(const Polyhedron& poly, double tau,
                                          const QuadratureSpec& spec) {
  IntegralResult total;
  for (const Face& f : poly.faces) {
    const IntegralResult r = error_integral_face(f, tau, spec);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.converged = total.converged && r.converged;
    total.depth = std::max(total.depth, r.depth);
    total.evaluations += r.evaluations;
  }
  return total;
}

inline IntegralResult error_integral_edge(const Polyhedron& poly, double tau,
                                          const QuadratureSpec& spec) {
  IntegralResult total;
  for (const Edge& e : poly.edges) {
    const IntegralResult r = error_integral_edge(e, tau, spec);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.converged = total.converged && r.converged;
    total.depth = std::max(total.depth, r.depth);
    total.evaluations += r.evaluations;
  }
  return total;
}

inline nlohmann::json to_json(const MassBreakdown& b) {
  nlohmann::json j;
  j["flux_total"] = b.flux_total;
  j["per_face_flux"] = nlohmann::json::object();
  for (const auto& [id, v] : b.per_face_flux) j["per_face_flux"][std::to_string(id)] = v;
  j["mean_curv_term"] = b.mean_curv_term;
  j["angle_term"] = b.angle_term;
  j["face_error_bound"] = b.face_error_bound;
  j["edge_error_bound"] = b.edge_error_bound;
  j["residual"] = b.residual;
  j["quad_error"] = b.quad_error;
  j["max_refinement_depth"] = b.max_refinement_depth;
  j["evaluations"] = b.evaluations;
  j["converged"] = b.converged;
  return j;
}

}  // namespace hypmass
