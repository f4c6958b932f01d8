#pragma once

// Geometry of planar faces and straight edges under g = b + e: g-unit
// normals, second fundamental form and mean curvature, dihedral angles, edge
// conormals, and the face-tangent field dual to e(nu_bar, .).
//
// Faces are exactly planar in coordinates, so all curvature comes from the
// metric; everything is evaluated pointwise at quadrature nodes. Computations
// run on the Euclidean-scaled matrix M = I + eps, eps_ij = x3^2 e_ij, which
// keeps the 3x3 inversion well conditioned near x3 -> 0.

#include <array>
#include <cmath>

#include "hypmass/geometry.hpp"
#include "hypmass/metric_field.hpp"
#include "hypmass/polyhedron.hpp"

namespace hypmass {

// Pointwise bundle shared by the g-dependent operations.
struct MetricEval {
  Point p;
  double z = 1.0;
  SymTensor2 e;
  std::array<SymTensor2, 3> de;
  SymTensor2 eps;                   // x3^2 e
  std::array<SymTensor2, 3> deps;   // d_k eps_ij
  Sym3 M;                           // I + eps = x3^2 g
  Sym3 Minv;
};

inline MetricEval metric_eval(const MetricField& field, const Point& p) {
  MetricEval ev;
  ev.p = p;
  ev.z = p.x3;
  ev.e = evaluate_e(field, p);
  ev.de = evaluate_de(field, p);
  const double z2 = ev.z * ev.z;
  ev.eps = z2 * ev.e;
  for (int k = 0; k < 3; ++k) {
    ev.deps[k] = z2 * ev.de[k];
    if (k == 2) ev.deps[k] = ev.deps[k] + (2.0 * ev.z) * ev.e;
  }
  ev.M = Sym3::identity() + ev.eps;
  ev.Minv = inverse(ev.M);
  return ev;
}

// Christoffel symbols of g assembled from dg = db + de.
inline Christoffel3 christoffel_g(const MetricEval& ev) {
  const double z = ev.z;
  const double z2 = z * z;
  // dg[k](i,j) = d_k g_ij = d_k e_ij - 2 z^-3 delta_k3 delta_ij
  std::array<SymTensor2, 3> dg = ev.de;
  const double w = -2.0 / (z2 * z);
  dg[2].xx += w;
  dg[2].yy += w;
  dg[2].zz += w;
  Christoffel3 c;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l)
          s += z2 * ev.Minv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        c.G[k][i][j] = 0.5 * s;
        c.G[k][j][i] = c.G[k][i][j];
      }
  return c;
}

inline Christoffel3 christoffel_g(const MetricField& field, const Point& p) {
  return christoffel_g(metric_eval(field, p));
}

// Outward g-unit normal of the face: g^{ij} a_j / sqrt(g^{kl} a_k a_l),
// in scaled form x3 (Minv a) / sqrt(a . Minv a).
inline Vec3 g_unit_normal(const MetricEval& ev, const Face& f) {
  const Vec3 a = f.plane.normal;
  const Vec3 Ma = apply(ev.Minv, a);
  return (ev.z / std::sqrt(dot(a, Ma))) * Ma;
}

inline Vec3 g_unit_normal(const MetricField& field, const Face& f, const Point& p) {
  return g_unit_normal(metric_eval(field, p), f);
}

// Mean curvature of the face under g, with the outward-normal convention
// that gives H_bar = -2 a3 at e = 0. The face is the level set of the linear
// function a.x - d, so A(Y,Z) = -Y^i Z^j Gamma^k_ij a_k / |grad|_g, traced
// with the induced metric.
inline double mean_curvature_g(const MetricEval& ev, const Face& f) {
  const FaceFrame fr = face_frame(f);
  const Christoffel3 gam = christoffel_g(ev);
  const Vec3 a = fr.a;
  const double lambda = ev.z * std::sqrt(dot(a, apply(ev.Minv, a)));

  const Vec3 t[2] = {fr.t1, fr.t2};
  double A[2][2];
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) s += t[al][i] * t[be][j] * gam.G[k][i][j] * a[k];
      A[al][be] = -s / lambda;
    }

  // induced metric q_ab = g(t_a, t_b) = z^-2 (t_a . M t_b)
  const double z2 = ev.z * ev.z;
  Sym2 q{quad_form(ev.M, t[0], t[0]) / z2, quad_form(ev.M, t[0], t[1]) / z2,
         quad_form(ev.M, t[1], t[1]) / z2};
  const Sym2 qi = inverse(q);
  return qi.a11 * A[0][0] + 2.0 * qi.a12 * A[0][1] + qi.a22 * A[1][1];
}

inline double mean_curvature_g(const MetricField& field, const Face& f, const Point& p) {
  return mean_curvature_g(metric_eval(field, p), f);
}

// Interior dihedral angle under g along the edge: pi - arccos g(nu_A, nu_B).
// The x3 scalings cancel, so conformal perturbations leave it invariant
// identically.
inline double dihedral_angle_g(const MetricEval& ev, const Edge& edge) {
  const Vec3& aA = edge.normal_a;
  const Vec3& aB = edge.normal_b;
  const double num = quad_form(ev.Minv, aA, aB);
  const double den =
      std::sqrt(quad_form(ev.Minv, aA, aA) * quad_form(ev.Minv, aB, aB));
  const double c = clamp_unit(num / den, 1e-12, "dihedral_angle_g");
  return M_PI - std::acos(c);
}

inline double dihedral_angle_g(const MetricField& field, const Edge& edge, const Point& p) {
  return dihedral_angle_g(metric_eval(field, p), edge);
}

enum class MetricChoice { Background, Perturbed };

// Unit conormal of the face along one of its boundary edges: tangent to the
// face, orthogonal to the edge, outward, unit in the chosen metric.
inline Vec3 edge_conormal(const MetricEval& ev, const Face& f, const Edge& edge,
                          MetricChoice which) {
  const Vec3 m = edge_outward_in_plane(f, edge);
  if (which == MetricChoice::Background) return ev.z * m;
  const Vec3 t = edge.direction();
  const Vec3 cand = m - (quad_form(ev.M, m, t) / quad_form(ev.M, t, t)) * t;
  const double len = std::sqrt(quad_form(ev.M, cand, cand)) / ev.z;  // g-norm
  return cand / len;
}

inline Vec3 edge_conormal(const MetricField& field, const Face& f, const Edge& edge,
                          MetricChoice which, const Point& p) {
  return edge_conormal(metric_eval(field, p), f, edge, which);
}

// The face-tangent vector X with b(X, t) = e(nu_bar, t) for all face
// tangents t; its nu_bar component is zero by construction.
inline Vec3 x_dual_field(const MetricEval& ev, const Face& f) {
  const FaceFrame fr = face_frame(f);
  const double c1 = ev.z * quad_form(ev.eps, fr.a, fr.t1);
  const double c2 = ev.z * quad_form(ev.eps, fr.a, fr.t2);
  return c1 * fr.t1 + c2 * fr.t2;
}

inline Vec3 x_dual_field(const MetricField& field, const Face& f, const Point& p) {
  return x_dual_field(metric_eval(field, p), f);
}

// e(nu_bar, n_bar) along an edge of the face, with n_bar the outward b-unit
// conormal: equals eps(a, m) in Euclidean components.
inline double e_nu_conormal(const MetricEval& ev, const Face& f, const Edge& edge) {
  const Vec3 m = edge_outward_in_plane(f, edge);
  return quad_form(ev.eps, f.plane.normal, m);
}

// The bracketed term (tr_b e - e(nu,nu)) <dV,nu> - V <A_bar, e>_b of the
// mean-curvature expansion. For equidistant-plane faces it cancels
// identically (dV contributes -a3 V, A_bar = -a3 b|F); assembled here so
// tests can assert the cancellation instead of silently dropping it.
inline double equidistant_face_bracket(const MetricEval& ev, const Face& f) {
  const FaceFrame fr = face_frame(f);
  const double V = 1.0 / ev.z;
  const double tr = trace(ev.eps);                        // tr_b e
  const double enn = quad_form(ev.eps, fr.a, fr.a);       // e(nu_bar, nu_bar)
  const double dVnu = -fr.a.z * V;                        // <dV, nu_bar>
  // <A_bar, e>_b: tangential contraction of A_bar = -a3 b|F with e
  const double tangential_trace =
      quad_form(ev.eps, fr.t1, fr.t1) + quad_form(ev.eps, fr.t2, fr.t2);
  const double Abar_e = -fr.a.z * tangential_trace;
  return (tr - enn) * dVnu - V * Abar_e;
}

inline double equidistant_face_bracket(const MetricField& field, const Face& f, const Point& p) {
  return equidistant_face_bracket(metric_eval(field, p), f);
}

}  // namespace hypmass
