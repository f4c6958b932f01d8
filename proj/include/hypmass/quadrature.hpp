#pragma once

// Adaptive numerical integration over planar polygonal faces (fan
// triangulation + Duffy-mapped Gauss rules) and straight edges
// (Gauss-Legendre), with two kinds of seeding before error-driven
// refinement: dyadic grading toward small x3 (the measure x3^-2 and the
// potential x3^-1 concentrate there) and geometric grading toward the point
// of the domain closest to the base point o, where cosh-power integrands
// peak. Error estimates are two-level differences; node ordering and the
// reduction order are deterministic.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "hypmass/geometry.hpp"
#include "hypmass/polyhedron.hpp"

namespace hypmass {

struct QuadratureSpec {
  int face_order = 6;    // triangle rule exact for total degree 2*face_order - 1
  int edge_order = 8;    // Gauss-Legendre points, exact for degree 2*edge_order - 1
  int max_depth = 8;     // adaptive refinement depth beyond the seed mesh
  double rel_tol = 1e-8;
  double grading = 2.0;  // gamma: seed-split until zmax/zmin <= 2^(2/gamma)
  int grading_depth_cap = 4;     // cap for the 2D x3-banding seed
  long max_leaves = 500000;

  void validate() const {
    if (face_order < 1 || edge_order < 1)
      throw std::invalid_argument("QuadratureSpec: orders must be >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: tolerance must be > 0");
    if (max_depth < 0) throw std::invalid_argument("QuadratureSpec: depth must be >= 0");
  }
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  int depth = 0;
  long evaluations = 0;
};

using ScalarIntegrand = std::function<double(const Point&)>;

namespace quadrule {

// Gauss-Legendre nodes/weights on [-1,1], Newton on the Legendre recurrence.
// Cache access is serialized; face/edge integrations resolve their rule once
// up front, so workers never contend per evaluation.
inline const std::vector<std::pair<double, double>>& gauss_legendre(int n) {
  static std::mutex mtx;
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  std::vector<std::pair<double, double>> rule(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      if (n == 1) { p1 = x; }
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
  }
  std::sort(rule.begin(), rule.end());
  return cache.emplace(n, std::move(rule)).first->second;
}

struct TriNode {
  double x, y, w;  // barycentric-free reference coordinates on the unit simplex
};

// Duffy-collapsed product rule on the unit simplex {x,y >= 0, x+y <= 1}:
// (order+1) x order Gauss points, exact for total degree 2*order - 1.
inline const std::vector<TriNode>& triangle_rule(int order) {
  static std::mutex mtx;
  static std::map<int, std::vector<TriNode>> cache;
  if (order < 1) throw std::invalid_argument("triangle_rule: order must be >= 1");
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
  }
  const auto gu = gauss_legendre(order + 1);
  const auto gv = gauss_legendre(order);
  std::vector<TriNode> nodes;
  nodes.reserve(gu.size() * gv.size());
  for (const auto& [xu, wu] : gu) {
    const double u = 0.5 * (xu + 1.0);
    for (const auto& [xv, wv] : gv) {
      const double v = 0.5 * (xv + 1.0);
      // x = u, y = v(1-u), Jacobian (1-u); [-1,1]^2 -> unit square factor 1/4
      nodes.push_back({u, v * (1.0 - u), 0.25 * wu * wv * (1.0 - u)});
    }
  }
  std::lock_guard<std::mutex> lock(mtx);
  return cache.emplace(order, std::move(nodes)).first->second;
}

}  // namespace quadrule

struct Triangle {
  Vec3 a, b, c;

  Vec3 centroid() const { return (a + b + c) / 3.0; }
  double area() const { return 0.5 * norm(cross(b - a, c - a)); }
  double diameter() const {
    return std::max({norm(b - a), norm(c - b), norm(a - c)});
  }
  double zmin() const { return std::min({a.z, b.z, c.z}); }
  double zmax() const { return std::max({a.z, b.z, c.z}); }
};

// Fan triangulation of a convex face from its vertex-average centroid.
inline std::vector<Triangle> triangulate(const Face& f) {
  const Vec3 c = f.centroid();
  std::vector<Triangle> tris;
  const std::size_t n = f.vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    tris.push_back({c, f.vertices[i].vec(), f.vertices[(i + 1) % n].vec()});
  return tris;
}

// Fan from a chosen vertex instead of the centroid (for cross-checks).
inline std::vector<Triangle> triangulate_from_vertex(const Face& f, std::size_t root) {
  const std::size_t n = f.vertices.size();
  if (root >= n) throw std::invalid_argument("triangulate_from_vertex: bad root");
  std::vector<Triangle> tris;
  for (std::size_t i = 1; i + 1 < n; ++i)
    tris.push_back({f.vertices[root].vec(), f.vertices[(root + i) % n].vec(),
                    f.vertices[(root + i + 1) % n].vec()});
  return tris;
}

namespace detail {

inline double rule_on_triangle(const Triangle& t, const ScalarIntegrand& f,
                               const std::vector<quadrule::TriNode>& nodes, long& evals) {
  const Vec3 e1 = t.b - t.a, e2 = t.c - t.a;
  const double jac = 2.0 * t.area();
  double s = 0.0;
  for (const auto& nd : nodes) {
    const Vec3 p = t.a + nd.x * e1 + nd.y * e2;
    s += nd.w * f(Point(p));
  }
  evals += static_cast<long>(nodes.size());
  return jac * s;
}

inline double rule_on_triangle(const Triangle& t, const ScalarIntegrand& f, int order,
                               long& evals) {
  return rule_on_triangle(t, f, quadrule::triangle_rule(order), evals);
}

inline std::array<Triangle, 4> split4(const Triangle& t) {
  const Vec3 ab = 0.5 * (t.a + t.b), bc = 0.5 * (t.b + t.c), ca = 0.5 * (t.c + t.a);
  return {Triangle{t.a, ab, ca}, Triangle{ab, t.b, bc}, Triangle{ca, bc, t.c},
          Triangle{ab, bc, ca}};
}

// Coarse sample of the cosh-distance minimizer over a triangle set.
inline Vec3 hotspot(const std::vector<Triangle>& tris) {
  Vec3 best{0, 0, 1};
  double best_val = 1e300;
  auto consider = [&](const Vec3& p) {
    if (!(p.z > 0.0)) return;
    const double v = cosh_distance(Point(p));
    if (v < best_val) {
      best_val = v;
      best = p;
    }
  };
  for (const Triangle& t : tris) {
    const int n = 6;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        const double x = static_cast<double>(i) / n, y = static_cast<double>(j) / n;
        consider(t.a + x * (t.b - t.a) + y * (t.c - t.a));
      }
  }
  return best;
}

struct FaceLeaf {
  Triangle tri;
  int depth = 0;
  long index = 0;  // creation order, fixes the reduction order
  double coarse = 0.0;
  double fine = 0.0;
  double err = 0.0;
  std::array<Triangle, 4> kids;
  std::array<double, 4> kid_vals{};
};

}  // namespace detail

// Adaptive integration of f against the Euclidean area element over a set of
// triangles. Callers fold any metric weight (x3^-2 etc.) into the integrand.
inline IntegralResult integrate_triangles(std::vector<Triangle> tris, const ScalarIntegrand& f,
                                          const QuadratureSpec& spec) {
  spec.validate();
  long evals = 0;

  // Seed 1: dyadic banding in x3 (capped).
  const double band_ratio = spec.grading > 0.0 ? std::pow(2.0, 2.0 / spec.grading) : 1e300;
  for (int pass = 0; pass < spec.grading_depth_cap; ++pass) {
    std::vector<Triangle> next;
    bool any = false;
    for (const Triangle& t : tris) {
      if (t.zmax() / t.zmin() > band_ratio) {
        const auto kids = detail::split4(t);
        next.insert(next.end(), kids.begin(), kids.end());
        any = true;
      } else {
        next.push_back(t);
      }
    }
    tris.swap(next);
    if (!any) break;
  }

  // Seed 2: geometric grading toward the cosh-distance hotspot, one scale
  // octave per ring. Bounded by ~log2(size/peak width) levels.
  {
    const Vec3 q = detail::hotspot(tris);
    const double h0 = std::max(0.5, q.z);
    std::vector<Triangle> work = std::move(tris);
    tris.clear();
    int guard = 0;
    while (!work.empty() && guard++ < 64) {
      std::vector<Triangle> next;
      for (const Triangle& t : work) {
        const Vec3 c = t.centroid();
        const double rad = std::max({norm(t.a - c), norm(t.b - c), norm(t.c - c)});
        const double dist = std::max(0.0, norm(c - q) - rad);
        if (t.diameter() > dist + h0)
          for (const Triangle& k : detail::split4(t)) next.push_back(k);
        else
          tris.push_back(t);
      }
      work.swap(next);
    }
    tris.insert(tris.end(), work.begin(), work.end());
  }

  std::vector<detail::FaceLeaf> leaves;
  long counter = 0;
  const auto& rule = quadrule::triangle_rule(spec.face_order);
  auto make_leaf = [&](const Triangle& t, int depth, double coarse_val) {
    detail::FaceLeaf lf;
    lf.tri = t;
    lf.depth = depth;
    lf.index = counter++;
    lf.coarse = coarse_val;
    lf.kids = detail::split4(t);
    lf.fine = 0.0;
    for (int k = 0; k < 4; ++k) {
      lf.kid_vals[k] = detail::rule_on_triangle(lf.kids[k], f, rule, evals);
      lf.fine += lf.kid_vals[k];
    }
    lf.err = std::abs(lf.fine - lf.coarse);
    return lf;
  };
  double run_value = 0.0, run_err = 0.0, run_l1 = 0.0;
  auto account = [&](const detail::FaceLeaf& lf, double sign) {
    run_value += sign * lf.fine;
    run_err += sign * lf.err;
    run_l1 += sign * std::abs(lf.fine);
  };
  for (const Triangle& t : tris) {
    leaves.push_back(make_leaf(t, 0, detail::rule_on_triangle(t, f, rule, evals)));
    account(leaves.back(), +1.0);
  }

  int max_depth_seen = 0;
  bool converged = false;
  while (true) {
    const double scale = std::max(std::abs(run_value), 1e-3 * run_l1);
    if (run_err <= spec.rel_tol * scale + 1e-300) {
      converged = true;
      break;
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < leaves.size(); ++i)
      if (leaves[i].err > leaves[worst].err ||
          (leaves[i].err == leaves[worst].err && leaves[i].index < leaves[worst].index))
        worst = i;
    if (leaves[worst].depth >= spec.max_depth ||
        static_cast<long>(leaves.size()) + 3 > spec.max_leaves)
      break;
    detail::FaceLeaf parent = leaves[worst];
    account(parent, -1.0);
    leaves[worst] = leaves.back();
    leaves.pop_back();
    for (int k = 0; k < 4; ++k) {
      leaves.push_back(make_leaf(parent.kids[k], parent.depth + 1, parent.kid_vals[k]));
      account(leaves.back(), +1.0);
      max_depth_seen = std::max(max_depth_seen, parent.depth + 1);
    }
  }

  // fixed reduction order: by creation index
  std::sort(leaves.begin(), leaves.end(),
            [](const detail::FaceLeaf& a, const detail::FaceLeaf& b) { return a.index < b.index; });
  double value = 0.0, err = 0.0;
  for (const auto& lf : leaves) {
    value += lf.fine;
    err += lf.err;
  }
  return {value, err, converged, max_depth_seen, evals};
}

inline IntegralResult integrate_face(const Face& face, const ScalarIntegrand& f,
                                     const QuadratureSpec& spec) {
  return integrate_triangles(triangulate(face), f, spec);
}

namespace detail {

struct Segment {
  Vec3 a, b;
  double length() const { return norm(b - a); }
  double zmin() const { return std::min(a.z, b.z); }
  double zmax() const { return std::max(a.z, b.z); }
};

inline double rule_on_segment(const Segment& s, const ScalarIntegrand& f,
                              const std::vector<std::pair<double, double>>& nodes,
                              long& evals) {
  const Vec3 mid = 0.5 * (s.a + s.b), half = 0.5 * (s.b - s.a);
  double acc = 0.0;
  for (const auto& [x, w] : nodes) acc += w * f(Point(mid + x * half));
  evals += static_cast<long>(nodes.size());
  return acc * 0.5 * s.length();
}

inline double rule_on_segment(const Segment& s, const ScalarIntegrand& f, int order,
                              long& evals) {
  return rule_on_segment(s, f, quadrule::gauss_legendre(order), evals);
}

struct EdgeLeaf {
  Segment seg;
  int depth = 0;
  long index = 0;
  double coarse = 0.0, fine = 0.0, err = 0.0;
  std::array<Segment, 2> kids;
  std::array<double, 2> kid_vals{};
};

}  // namespace detail

// Adaptive Gauss-Legendre along the straight segment p0 -> p1 against the
// Euclidean length element; metric weights go into the integrand.
inline IntegralResult integrate_edge(const Vec3& p0, const Vec3& p1, const ScalarIntegrand& f,
                                     const QuadratureSpec& spec) {
  spec.validate();
  long evals = 0;
  std::vector<detail::Segment> segs = {{p0, p1}};

  const double band_ratio = spec.grading > 0.0 ? std::pow(2.0, 2.0 / spec.grading) : 1e300;
  for (int pass = 0; pass < 48; ++pass) {
    std::vector<detail::Segment> next;
    bool any = false;
    for (const auto& s : segs) {
      if (s.zmax() / s.zmin() > band_ratio) {
        const Vec3 m = 0.5 * (s.a + s.b);
        next.push_back({s.a, m});
        next.push_back({m, s.b});
        any = true;
      } else {
        next.push_back(s);
      }
    }
    segs.swap(next);
    if (!any) break;
  }
  {
    // hotspot grading along the segment
    Vec3 q = p0;
    double best = 1e300;
    for (int i = 0; i <= 64; ++i) {
      const Vec3 p = p0 + (static_cast<double>(i) / 64.0) * (p1 - p0);
      const double v = cosh_distance(Point(p));
      if (v < best) {
        best = v;
        q = p;
      }
    }
    const double h0 = std::max(0.5, q.z);
    std::vector<detail::Segment> work = std::move(segs);
    segs.clear();
    int guard = 0;
    while (!work.empty() && guard++ < 64) {
      std::vector<detail::Segment> next;
      for (const auto& s : work) {
        const Vec3 c = 0.5 * (s.a + s.b);
        const double dist = std::max(0.0, norm(c - q) - 0.5 * s.length());
        if (s.length() > dist + h0) {
          next.push_back({s.a, c});
          next.push_back({c, s.b});
        } else {
          segs.push_back(s);
        }
      }
      work.swap(next);
    }
    segs.insert(segs.end(), work.begin(), work.end());
  }

  std::vector<detail::EdgeLeaf> leaves;
  long counter = 0;
  const auto& rule = quadrule::gauss_legendre(spec.edge_order);
  auto make_leaf = [&](const detail::Segment& s, int depth, double coarse_val) {
    detail::EdgeLeaf lf;
    lf.seg = s;
    lf.depth = depth;
    lf.index = counter++;
    lf.coarse = coarse_val;
    const Vec3 m = 0.5 * (s.a + s.b);
    lf.kids = {detail::Segment{s.a, m}, detail::Segment{m, s.b}};
    lf.fine = 0.0;
    for (int k = 0; k < 2; ++k) {
      lf.kid_vals[k] = detail::rule_on_segment(lf.kids[k], f, rule, evals);
      lf.fine += lf.kid_vals[k];
    }
    lf.err = std::abs(lf.fine - lf.coarse);
    return lf;
  };
  double run_value = 0.0, run_err = 0.0, run_l1 = 0.0;
  auto account = [&](const detail::EdgeLeaf& lf, double sign) {
    run_value += sign * lf.fine;
    run_err += sign * lf.err;
    run_l1 += sign * std::abs(lf.fine);
  };
  for (const auto& s : segs) {
    leaves.push_back(make_leaf(s, 0, detail::rule_on_segment(s, f, rule, evals)));
    account(leaves.back(), +1.0);
  }

  int max_depth_seen = 0;
  bool converged = false;
  while (true) {
    const double scale = std::max(std::abs(run_value), 1e-3 * run_l1);
    if (run_err <= spec.rel_tol * scale + 1e-300) {
      converged = true;
      break;
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < leaves.size(); ++i)
      if (leaves[i].err > leaves[worst].err ||
          (leaves[i].err == leaves[worst].err && leaves[i].index < leaves[worst].index))
        worst = i;
    if (leaves[worst].depth >= spec.max_depth ||
        static_cast<long>(leaves.size()) + 1 > spec.max_leaves)
      break;
    detail::EdgeLeaf parent = leaves[worst];
    account(parent, -1.0);
    leaves[worst] = leaves.back();
    leaves.pop_back();
    for (int k = 0; k < 2; ++k) {
      leaves.push_back(make_leaf(parent.kids[k], parent.depth + 1, parent.kid_vals[k]));
      account(leaves.back(), +1.0);
      max_depth_seen = std::max(max_depth_seen, parent.depth + 1);
    }
  }

  std::sort(leaves.begin(), leaves.end(),
            [](const detail::EdgeLeaf& a, const detail::EdgeLeaf& b) { return a.index < b.index; });
  double value = 0.0, err = 0.0;
  for (const auto& lf : leaves) {
    value += lf.fine;
    err += lf.err;
  }
  return {value, err, converged, max_depth_seen, evals};
}

inline IntegralResult integrate_edge(const Edge& e, const ScalarIntegrand& f,
                                     const QuadratureSpec& spec) {
  return integrate_edge(e.a.vec(), e.b.vec(), f, spec);
}

}  // namespace hypmass
