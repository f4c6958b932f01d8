#pragma once

// Polyhedra with Euclidean-planar convex faces in the upper half-space, plus
// the closed-form background geometry of their faces and edges: outward
// normals, second fundamental form, mean curvature H_bar = -2 a3, dihedral
// angles. Faces are stored as counterclockwise vertex loops seen from
// outside.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hypmass/geometry.hpp"
#include "hypmass/halfspace.hpp"

namespace hypmass {

struct Face {
  int id = -1;
  Plane plane;
  std::vector<int> vertex_ids;
  std::vector<Point> vertices;  // ordered loop, CCW seen from outside

  Vec3 centroid() const {
    Vec3 c{};
    for (const Point& v : vertices) c = c + v.vec();
    return c / static_cast<double>(vertices.size());
  }

  double euclidean_area() const {
    Vec3 s{};
    const Vec3 c = centroid();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const Vec3 u = vertices[i].vec() - c;
      const Vec3 v = vertices[(i + 1) % vertices.size()].vec() - c;
      s = s + cross(u, v);
    }
    return 0.5 * norm(s);
  }
};

struct Edge {
  int id = -1;
  int v0 = -1, v1 = -1;  // endpoint vertex ids
  Point a, b;
  int face_a = -1, face_b = -1;
  Vec3 normal_a, normal_b;  // outward Euclidean face normals

  Vec3 direction() const { return normalized(b.vec() - a.vec()); }
  double euclidean_length() const { return norm(b.vec() - a.vec()); }
  Point at(double t) const { return Point((1.0 - t) * a.vec() + t * b.vec()); }
};

struct Polyhedron {
  std::vector<Point> vertices;
  std::vector<Face> faces;
  std::vector<Edge> edges;

  Vec3 centroid() const {
    Vec3 c{};
    for (const Point& v : vertices) c = c + v.vec();
    return c / static_cast<double>(vertices.size());
  }
};

struct PolyhedronOptions {
  // Theorem hypothesis sin(alpha_bar) >= c; set <= 0 to disable the check
  // (the cone family of the flux example needs angles degenerating with eps).
  double min_sin_dihedral = 0.05;
  // Coplanarity / convexity tolerance, scaled by the face diameter when the
  // face extends beyond unit size (pure absolute 1e-12 is below double
  // roundoff for coordinates ~1e6).
  double geom_tol = 1e-12;
  bool check_outward_orientation = true;
};

// Right-handed Euclidean-orthonormal frame (t1, t2, a) adapted to a face.
struct FaceFrame {
  Vec3 t1, t2, a;
};

inline FaceFrame face_frame(const Face& f) {
  const Vec3 a = f.plane.normal;
  int k = 0;
  double best = std::abs(a.x);
  if (std::abs(a.y) < best) { k = 1; best = std::abs(a.y); }
  if (std::abs(a.z) < best) k = 2;
  Vec3 axis{};
  axis[k] = 1.0;
  const Vec3 t1 = normalized(axis - dot(axis, a) * a);
  const Vec3 t2 = cross(a, t1);
  return {t1, t2, a};
}

// nu_bar = x3 * a^i d_i: the outward b-unit normal of the face through p.
inline Vec3 outward_normal_bar(const Face& f, const Point& p) {
  return p.x3 * f.plane.normal;
}

// d_nu_bar V = -a3 V  (normal derivative of the static potential).
inline double normal_derivative_V(const Face& f, const Point& p) {
  return -f.plane.normal.z * static_potential(p);
}

// Second fundamental form of the face under b, in a Euclidean-orthonormal
// tangent basis: A_ab = -a3 * x3^-2 delta_ab. Convention A(Y,Z) =
// <nabla_Y nu_bar, Z>_b with outward nu_bar.
inline Sym2 background_second_fundamental_form(const Face& f, const Point& p) {
  const double v = -f.plane.normal.z / (p.x3 * p.x3);
  return {v, 0.0, v};
}

// H_bar = -2 a3, constant on the face.
inline double background_mean_curvature(const Face& f) {
  return -2.0 * f.plane.normal.z;
}

// Interior dihedral angle pi - arccos(a_A . a_B), in (0, pi). Parallel faces
// are degenerate and rejected.
inline double background_dihedral_angle(const Edge& e) {
  const double c = clamp_unit(dot(e.normal_a, e.normal_b), 1e-12, "background_dihedral_angle");
  if (std::abs(c) >= 1.0 - 1e-12)
    throw std::domain_error("background_dihedral_angle: faces parallel along edge " +
                            std::to_string(e.id));
  return M_PI - std::acos(c);
}

namespace detail {

inline Vec3 newell_normal(const std::vector<Vec3>& loop) {
  Vec3 n{};
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& u = loop[i];
    const Vec3& v = loop[(i + 1) % loop.size()];
    n.x += (u.y - v.y) * (u.z + v.z);
    n.y += (u.z - v.z) * (u.x + v.x);
    n.z += (u.x - v.x) * (u.y + v.y);
  }
  return n;
}

}  // namespace detail

// Assembles a polyhedron from a vertex table and per-face index loops
// (counterclockwise seen from outside). Verifies: closed boundary, consistent
// orientation, positive heights, planar convex faces, outwardness, and the
// dihedral bound sin(alpha_bar) >= min_sin_dihedral.
inline Polyhedron build_polyhedron(const std::vector<Vec3>& vertex_table,
                                   const std::vector<std::vector<int>>& face_loops,
                                   const PolyhedronOptions& opts = {}) {
  Polyhedron poly;
  poly.vertices.reserve(vertex_table.size());
  for (std::size_t i = 0; i < vertex_table.size(); ++i) {
    if (!(vertex_table[i].z > 0.0))
      throw std::invalid_argument("build_polyhedron: nonpositive height at vertex " +
                                  std::to_string(i));
    poly.vertices.emplace_back(vertex_table[i]);
  }

  for (std::size_t fi = 0; fi < face_loops.size(); ++fi) {
    const auto& loop = face_loops[fi];
    if (loop.size() < 3)
      throw std::invalid_argument("build_polyhedron: face " + std::to_string(fi) +
                                  " has fewer than 3 vertices");
    std::vector<Vec3> pts;
    double scale = 1.0;
    for (int vi : loop) {
      if (vi < 0 || vi >= static_cast<int>(poly.vertices.size()))
        throw std::invalid_argument("build_polyhedron: bad vertex index in face " +
                                    std::to_string(fi));
      pts.push_back(poly.vertices[vi].vec());
      scale = std::max({scale, std::abs(pts.back().x), std::abs(pts.back().y),
                        std::abs(pts.back().z)});
    }
    const Vec3 nn = detail::newell_normal(pts);
    if (norm(nn) <= opts.geom_tol * scale * scale)
      throw std::invalid_argument("build_polyhedron: degenerate face " + std::to_string(fi));
    const Vec3 a = normalized(nn);
    Vec3 c{};
    for (const Vec3& q : pts) c = c + q;
    c = c / static_cast<double>(pts.size());
    const double d = dot(a, c);

    const double tol = opts.geom_tol * scale;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (std::abs(dot(a, pts[i]) - d) > tol)
        throw std::invalid_argument("build_polyhedron: face " + std::to_string(fi) +
                                    " is not planar at loop position " + std::to_string(i));
    // convexity: consecutive edge cross products aligned with the normal
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec3 e1 = pts[(i + 1) % pts.size()] - pts[i];
      const Vec3 e2 = pts[(i + 2) % pts.size()] - pts[(i + 1) % pts.size()];
      if (dot(cross(e1, e2), a) < -tol * scale)
        throw std::invalid_argument("build_polyhedron: face " + std::to_string(fi) +
                                    " is not convex");
    }

    Face f;
    f.id = static_cast<int>(fi);
    f.plane = Plane(a, d);
    f.vertex_ids = loop;
    for (int vi : loop) f.vertices.push_back(poly.vertices[vi]);
    poly.faces.push_back(std::move(f));
  }

  // Edge adjacency: each undirected edge must be traversed once per direction.
  std::map<std::pair<int, int>, std::vector<std::pair<int, bool>>> edge_map;
  for (const Face& f : poly.faces) {
    const std::size_t n = f.vertex_ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      int u = f.vertex_ids[i], v = f.vertex_ids[(i + 1) % n];
      const bool forward = u < v;
      edge_map[{std::min(u, v), std::max(u, v)}].push_back({f.id, forward});
    }
  }
  int edge_id = 0;
  for (const auto& [key, uses] : edge_map) {
    if (uses.size() == 1)
      throw std::invalid_argument("build_polyhedron: open boundary at edge (" +
                                  std::to_string(key.first) + "," + std::to_string(key.second) +
                                  ") of face " + std::to_string(uses[0].first));
    if (uses.size() > 2)
      throw std::invalid_argument("build_polyhedron: edge shared by more than two faces");
    if (uses[0].second == uses[1].second)
      throw std::invalid_argument("build_polyhedron: inconsistent orientation between faces " +
                                  std::to_string(uses[0].first) + " and " +
                                  std::to_string(uses[1].first));
    Edge e;
    e.id = edge_id++;
    e.v0 = key.first;
    e.v1 = key.second;
    e.a = poly.vertices[key.first];
    e.b = poly.vertices[key.second];
    e.face_a = uses[0].first;
    e.face_b = uses[1].first;
    e.normal_a = poly.faces[e.face_a].plane.normal;
    e.normal_b = poly.faces[e.face_b].plane.normal;
    if (e.euclidean_length() <= 0.0)
      throw std::invalid_argument("build_polyhedron: zero-length edge");
    poly.edges.push_back(std::move(e));
  }

  if (opts.check_outward_orientation) {
    const Vec3 pc = poly.centroid();
    for (const Face& f : poly.faces)
      if (dot(f.plane.normal, f.centroid() - pc) <= 0.0)
        throw std::invalid_argument("build_polyhedron: face " + std::to_string(f.id) +
                                    " is not outward oriented");
  }

  if (opts.min_sin_dihedral > 0.0) {
    for (const Edge& e : poly.edges) {
      const double alpha = background_dihedral_angle(e);
      if (std::sin(alpha) < opts.min_sin_dihedral)
        throw std::invalid_argument("build_polyhedron: dihedral angle too degenerate at edge " +
                                    std::to_string(e.id) + " (sin alpha = " +
                                    std::to_string(std::sin(alpha)) + ")");
    }
  }
  return poly;
}

// Overload taking explicit vertex loops; equal endpoints are merged.
inline Polyhedron build_polyhedron(const std::vector<std::vector<Vec3>>& loops,
                                   const PolyhedronOptions& opts = {}) {
  std::vector<Vec3> table;
  std::vector<std::vector<int>> index_loops;
  double scale = 1.0;
  for (const auto& loop : loops)
    for (const Vec3& p : loop)
      scale = std::max({scale, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
  const double tol = 1e-12 * scale;
  for (const auto& loop : loops) {
    std::vector<int> idx;
    for (const Vec3& p : loop) {
      int found = -1;
      for (std::size_t i = 0; i < table.size(); ++i)
        if (norm(table[i] - p) <= tol) { found = static_cast<int>(i); break; }
      if (found < 0) {
        table.push_back(p);
        found = static_cast<int>(table.size()) - 1;
      }
      idx.push_back(found);
    }
    index_loops.push_back(std::move(idx));
  }
  return build_polyhedron(table, index_loops, opts);
}

// Axis-aligned box [x0,x1] x [y0,y1] x [z0,z1], z0 > 0. Six faces, twelve
// edges, all background dihedral angles pi/2.
inline Polyhedron make_box(double x0, double x1, double y0, double y1, double z0, double z1,
                           const PolyhedronOptions& opts = {}) {
  if (!(x0 < x1 && y0 < y1 && 0.0 < z0 && z0 < z1))
    throw std::invalid_argument("make_box: invalid extents");
  const std::vector<Vec3> v = {
      {x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0},
      {x0, y0, z1}, {x1, y0, z1}, {x1, y1, z1}, {x0, y1, z1}};
  const std::vector<std::vector<int>> loops = {
      {0, 3, 2, 1},  // bottom, outward (0,0,-1)
      {4, 5, 6, 7},  // top
      {0, 1, 5, 4},  // y = y0
      {2, 3, 7, 6},  // y = y1
      {1, 2, 6, 5},  // x = x1
      {3, 0, 4, 7},  // x = x0
  };
  return build_polyhedron(v, loops, opts);
}

// Cone polyhedron of the flux-decay example: regular n-gon base of
// circumradius rho = eps^-s on the horosphere {x3 = eps}, apex (0,0,1/eps).
// One base vertex sits on the +y axis so that the side edge through it is
//   E1 = {(0, rho (1 - eps z)/(1 - eps^2), z) : z in [eps, 1/eps]},
// and for n = 2 (mod 4) a base edge crosses the +x axis at x = rho cos(pi/n)
// (the E2 edge). Base dihedral angles degenerate as eps -> 0, so the
// sin(alpha) floor is disabled by default here.
struct ConePolyhedron {
  Polyhedron poly;
  int base_face_id = -1;
  int side_face_id = -1;  // representative side face (adjacent to e2 edge)
  int e1_edge_id = -1;    // side edge from (0, rho, eps) to the apex
  int e2_edge_id = -1;    // representative base edge
  int n = 0;
  double eps = 0.0, s = 0.0, rho = 0.0;
};

inline ConePolyhedron cone_polyhedron(int n, double eps, double s,
                                      const PolyhedronOptions& user_opts = PolyhedronOptions{
                                          .min_sin_dihedral = 0.0}) {
  if (n < 3) throw std::invalid_argument("cone_polyhedron: n must be >= 3");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("cone_polyhedron: need 0 < eps < 1");
  if (!(s > 0.0)) throw std::invalid_argument("cone_polyhedron: need s > 0");
  const double rho = std::pow(eps, -s);

  std::vector<Vec3> verts;
  for (int k = 0; k < n; ++k) {
    const double th = 0.5 * M_PI + 2.0 * M_PI * k / n;
    verts.push_back({rho * std::cos(th), rho * std::sin(th), eps});
  }
  verts.push_back({0.0, 0.0, 1.0 / eps});  // apex, index n

  std::vector<std::vector<int>> loops;
  std::vector<int> base;
  for (int k = n - 1; k >= 0; --k) base.push_back(k);  // CCW seen from below
  loops.push_back(base);
  for (int k = 0; k < n; ++k) loops.push_back({k, (k + 1) % n, n});

  ConePolyhedron cone;
  cone.poly = build_polyhedron(verts, loops, user_opts);
  cone.base_face_id = 0;
  cone.n = n;
  cone.eps = eps;
  cone.s = s;
  cone.rho = rho;

  // E1: the side edge with both x-coordinates ~0 (vertex 0 to apex).
  for (const Edge& e : cone.poly.edges)
    if ((e.v0 == 0 && e.v1 == n) || (e.v0 == n && e.v1 == 0)) cone.e1_edge_id = e.id;
  // E2: base edge whose midpoint is closest to the +x axis.
  double best = -1.0;
  for (const Edge& e : cone.poly.edges) {
    if (e.v0 == n || e.v1 == n) continue;
    const Vec3 mid = 0.5 * (e.a.vec() + e.b.vec());
    if (mid.x > best) {
      best = mid.x;
      cone.e2_edge_id = e.id;
    }
  }
  const Edge& e2 = cone.poly.edges[cone.e2_edge_id];
  cone.side_face_id = (e2.face_a == cone.base_face_id) ? e2.face_b : e2.face_a;
  return cone;
}

// JSON serialization: {"vertices": [[x1,x2,x3],...], "faces": [[i,...],...]}.
inline nlohmann::json to_json(const Polyhedron& poly) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const Point& p : poly.vertices) j["vertices"].push_back({p.x1, p.x2, p.x3});
  j["faces"] = nlohmann::json::array();
  for (const Face& f : poly.faces) j["faces"].push_back(f.vertex_ids);
  return j;
}

inline Polyhedron polyhedron_from_json(const nlohmann::json& j,
                                       const PolyhedronOptions& opts = {}) {
  std::vector<Vec3> verts;
  for (const auto& v : j.at("vertices"))
    verts.push_back({v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()});
  std::vector<std::vector<int>> loops;
  for (const auto& f : j.at("faces")) loops.push_back(f.get<std::vector<int>>());
  return build_polyhedron(verts, loops, opts);
}

// Outward in-plane Euclidean unit conormal of face f along one of its edges.
// Uses the loop traversal direction of f: m = t x a.
inline Vec3 edge_outward_in_plane(const Face& f, const Edge& e) {
  const std::size_t n = f.vertex_ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int u = f.vertex_ids[i], v = f.vertex_ids[(i + 1) % n];
    if (u == e.v0 && v == e.v1)
      return normalized(cross(normalized(e.b.vec() - e.a.vec()), f.plane.normal));
    if (u == e.v1 && v == e.v0)
      return normalized(cross(normalized(e.a.vec() - e.b.vec()), f.plane.normal));
  }
  throw std::invalid_argument("edge_outward_in_plane: edge does not belong to face");
}

}  // namespace hypmass
