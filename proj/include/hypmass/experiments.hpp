#pragma once

// Experiment drivers behind the CLI: the polyhedral mass-formula convergence
// check over growing boxes, the cone-family error-integral sweep, the
// sphere-vs-polyhedron mass comparison, and the field decay check. Each run
// returns rows plus recomputable assertions; emission writes CSV (stable
// column order), JSON, and optional SVG charts.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hypmass/mass.hpp"
#include "hypmass/report.hpp"

namespace hypmass {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // field
  std::string field_family = "conformal";
  double m = 1.0;
  double tau_prime = 3.0;
  Vec3 bump_center{0.0, 0.0, 2.0};
  double bump_radius = 0.75;
  Vec3 aniso_diag{1.0, 0.7, 0.4};
  // polyhedra
  std::string poly_family = "box";
  std::vector<double> box_schedule = {4.0, 8.0, 16.0};
  int cone_n = 6;
  double cone_s = 3.0;
  std::vector<double> eps_schedule = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  // quadrature: deeper refinement cap than the bare QuadratureSpec default,
  // since the cone sweep meshes faces whose diameter exceeds the integrand
  // peak width by ~2^20
  QuadratureSpec quad{.max_depth = 26};
  // sphere oracle
  std::vector<double> sphere_radii = {4.0, 5.0, 6.0};
  int sphere_polar = 128;
  int sphere_azimuth = 256;
  // run behavior
  std::string out_dir = "out";
  int threads = 1;
  unsigned long seed = 12345;
  double mass_rel_tol = 0.02;
  std::vector<double> decay_radii = {2.0, 3.0, 4.0, 5.0, 6.0};
  bool verbose = false;
  bool emit_svg = true;

  MetricField make_field() const {
    FamilyParams params;
    params.m = m;
    params.tau_prime = tau_prime;
    params.center = bump_center;
    params.radius = bump_radius;
    params.diag = aniso_diag;
    try {
      return builtin_family(field_family, params);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
  }

  void validate() const {
    auto monotone = [](const std::vector<double>& v, bool increasing) {
      for (std::size_t i = 1; i < v.size(); ++i)
        if (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
      return true;
    };
    if (box_schedule.empty() || eps_schedule.empty() || sphere_radii.empty())
      throw ConfigError("config: schedules must be non-empty");
    if (!monotone(box_schedule, true)) throw ConfigError("config: box schedule must increase");
    if (!monotone(eps_schedule, false)) throw ConfigError("config: eps schedule must decrease");
    if (!monotone(sphere_radii, true)) throw ConfigError("config: sphere radii must increase");
    if (field_family == "conformal" || field_family == "anisotropic")
      if (!(tau_prime > 1.5)) throw ConfigError("config: tau_prime must exceed 3/2");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
  }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config: empty numeric list '" + s + "'");
  return out;
}

inline Vec3 parse_vec3(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 3) throw ConfigError("config: expected three components in '" + s + "'");
  return {v[0], v[1], v[2]};
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config: expected boolean, got '" + s + "'");
}

}  // namespace detail

inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  try {
    if (key == "field.family") cfg.field_family = value;
    else if (key == "field.m") cfg.m = std::stod(value);
    else if (key == "field.tau_prime") cfg.tau_prime = std::stod(value);
    else if (key == "field.bump_center") cfg.bump_center = detail::parse_vec3(value);
    else if (key == "field.bump_radius") cfg.bump_radius = std::stod(value);
    else if (key == "field.aniso_diag") cfg.aniso_diag = detail::parse_vec3(value);
    else if (key == "poly.family") cfg.poly_family = value;
    else if (key == "poly.box_schedule") cfg.box_schedule = detail::parse_list(value);
    else if (key == "poly.cone_n") cfg.cone_n = std::stoi(value);
    else if (key == "poly.cone_s") cfg.cone_s = std::stod(value);
    else if (key == "poly.eps_schedule") cfg.eps_schedule = detail::parse_list(value);
    else if (key == "quad.face_order") cfg.quad.face_order = std::stoi(value);
    else if (key == "quad.edge_order") cfg.quad.edge_order = std::stoi(value);
    else if (key == "quad.max_depth") cfg.quad.max_depth = std::stoi(value);
    else if (key == "quad.rel_tol") cfg.quad.rel_tol = std::stod(value);
    else if (key == "quad.grading") cfg.quad.grading = std::stod(value);
    else if (key == "sphere.radii") cfg.sphere_radii = detail::parse_list(value);
    else if (key == "sphere.polar") cfg.sphere_polar = std::stoi(value);
    else if (key == "sphere.azimuth") cfg.sphere_azimuth = std::stoi(value);
    else if (key == "run.out_dir") cfg.out_dir = value;
    else if (key == "run.threads") cfg.threads = std::stoi(value);
    else if (key == "run.seed") cfg.seed = std::stoul(value);
    else if (key == "run.mass_rel_tol") cfg.mass_rel_tol = std::stod(value);
    else if (key == "run.decay_radii") cfg.decay_radii = detail::parse_list(value);
    else if (key == "run.verbose") cfg.verbose = detail::parse_bool(value);
    else if (key == "run.emit_svg") cfg.emit_svg = detail::parse_bool(value);
    else throw ConfigError("config: unknown key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config: bad value '" + value + "' for key '" + key + "'");
  }
}

// Key-value config file: one `key = value` per line, '#' comments.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
    apply_config_key(cfg, strip(stripped.substr(0, eq)), strip(stripped.substr(eq + 1)));
  }
  return cfg;
}

struct Assertion {
  std::string text;
  bool passed = true;
};

struct RunReport {
  std::string name;
  std::vector<std::pair<std::string, Table>> tables;  // (suffix, table)
  std::vector<Assertion> assertions;
  nlohmann::json meta;

  bool passed() const {
    for (const auto& a : assertions)
      if (!a.passed) return false;
    return true;
  }
  void require(bool ok, const std::string& text) { assertions.push_back({text, ok}); }
};

// Debug dump of pointwise mean curvature over faces and dihedral angles
// along edges, sampled at a coarse rule per face triangle / edge. Columns:
// kind (0 face H, 1 edge alpha), id, x1, x2, x3, value, background_value.
inline void dump_surface_nodes_csv(const MetricField& field, const Polyhedron& poly,
                                   const std::string& path) {
  Table t;
  t.columns = {"kind", "id", "x1", "x2", "x3", "value", "background_value"};
  for (const Face& f : poly.faces) {
    for (const Triangle& tri : triangulate(f)) {
      for (const auto& nd : quadrule::triangle_rule(3)) {
        const Vec3 p = tri.a + nd.x * (tri.b - tri.a) + nd.y * (tri.c - tri.a);
        const Point q(p);
        t.add_row({0.0, static_cast<double>(f.id), q.x1, q.x2, q.x3,
                   mean_curvature_g(field, f, q), background_mean_curvature(f)});
      }
    }
  }
  for (const Edge& e : poly.edges) {
    for (const auto& [x, w] : quadrule::gauss_legendre(8)) {
      const Point q = e.at(0.5 * (x + 1.0));
      t.add_row({1.0, static_cast<double>(e.id), q.x1, q.x2, q.x3,
                 dihedral_angle_g(field, e, q), background_dihedral_angle(e)});
    }
  }
  write_csv(t, path);
}

// Least-squares slope of log(y) against log(x).
inline double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Mass-formula check over the box schedule: flux side vs deficit side, with
// the residual required to stay below the cosh-decay error bounds times the
// constant calibrated on the first row (factor-2 slack).
inline RunReport run_theorem_check(const ExperimentConfig& cfg) {
  cfg.validate();
  const MetricField field = cfg.make_field();
  RunReport rep;
  rep.name = "theorem_check";
  Table t;
  t.columns = {"param", "flux", "mean_curv_term", "angle_term", "residual",
               "face_bound", "edge_bound", "quad_error"};
  std::vector<MassBreakdown> rows;
  for (double L : cfg.box_schedule) {
    const Polyhedron poly = make_box(-L, L, -L, L, 1.0 / L, L);
    const MassBreakdown b = evaluate_theorem(field, poly, cfg.quad, cfg.threads);
    if (cfg.verbose) {
      std::filesystem::create_directories(cfg.out_dir);
      dump_surface_nodes_csv(field, poly,
                             cfg.out_dir + "/theorem_check_nodes_L" + format_double(L) + ".csv");
    }
    rows.push_back(b);
    t.add_row({L, b.flux_total, b.mean_curv_term, b.angle_term, b.residual, b.face_error_bound,
               b.edge_error_bound, b.quad_error});
    rep.require(b.converged, "quadrature converged at L = " + format_double(L));
  }
  const double bounds0 = rows[0].error_bound_sum();
  const double K0 = bounds0 > 0.0 ? std::abs(rows[0].residual) / bounds0 : 0.0;
  rep.meta["K_first_row"] = K0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double limit = 2.0 * K0 * rows[i].error_bound_sum() + rows[i].quad_error;
    rep.require(std::abs(rows[i].residual) <= limit,
                "row " + std::to_string(i) + ": |residual| = " +
                    format_double(std::abs(rows[i].residual)) +
                    " <= 2 K0 (face_bound + edge_bound) + quad_error = " + format_double(limit));
  }
  rep.tables.emplace_back("", std::move(t));
  return rep;
}

// Cone-family sweep of the four error integrals (E1 edge, E2 base edge, base
// face, representative side face) plus the top segment of E1, against the
// decay predictions. Asserts monotone decay to below a quarter of the first
// value; the fitted E2 exponent and the E1-top bound constant are reported.
inline RunReport run_cone_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const MetricField field = cfg.make_field();
  const double tau = field.tau;
  if (!(cfg.cone_s < 2.0 * tau))
    throw ConfigError(
        "cone sweep requires s < 2 tau: the example needs rho(eps) = o(eps^(-2 tau)), got s = " +
        format_double(cfg.cone_s) + ", tau = " + format_double(tau));
  RunReport rep;
  rep.name = "cone_sweep";
  Table t;
  t.columns = {"eps",          "e1_integral",  "e2_integral", "base_integral",
               "side_integral", "e1_top",      "e1_top_bound", "e2_bound",
               "quad_error"};
  // int_R (1+x^2)^(1-2tau) dx = sqrt(pi) Gamma(2tau - 3/2) / Gamma(2tau - 1)
  const double Jtau = std::sqrt(M_PI) *
                      std::exp(std::lgamma(2.0 * tau - 1.5) - std::lgamma(2.0 * tau - 1.0));
  for (double eps : cfg.eps_schedule) {
    const ConePolyhedron cone = cone_polyhedron(cfg.cone_n, eps, cfg.cone_s);
    const Polyhedron& poly = cone.poly;
    const Edge& E1 = poly.edges[cone.e1_edge_id];
    const IntegralResult e1 = error_integral_edge(E1, tau, cfg.quad);
    const IntegralResult e2 =
        error_integral_edge(poly.edges[cone.e2_edge_id], tau, cfg.quad);
    const IntegralResult bf = error_integral_face(poly.faces[cone.base_face_id], tau, cfg.quad);
    const IntegralResult sf = error_integral_face(poly.faces[cone.side_face_id], tau, cfg.quad);
    const Vec3 lo = E1.a.x3 < E1.b.x3 ? E1.a.vec() : E1.b.vec();
    const Vec3 hi = E1.a.x3 < E1.b.x3 ? E1.b.vec() : E1.a.vec();
    const double tmid = (0.5 / eps - lo.z) / (hi.z - lo.z);
    const IntegralResult e1top = error_integral_edge(lo + tmid * (hi - lo), hi, tau, cfg.quad);
    const double e1top_bound =
        std::max(eps * cone.rho, 1.0) * std::pow(eps, 2.0 * tau - 1.0);
    const double e2_bound =
        std::pow(2.0, 2.0 * tau - 1.0) * std::pow(eps, 2.0 * tau - 2.0) * Jtau;
    t.add_row({eps, e1.value, e2.value, bf.value, sf.value, e1top.value, e1top_bound, e2_bound,
               e1.error_estimate + e2.error_estimate + bf.error_estimate + sf.error_estimate +
                   e1top.error_estimate});
    rep.require(e1.converged && e2.converged && bf.converged && sf.converged && e1top.converged,
                "quadrature converged at eps = " + format_double(eps));
  }
  for (std::size_t col = 1; col <= 4; ++col) {
    bool decreasing = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i)
      if (!(t.rows[i][col] < t.rows[i - 1][col])) decreasing = false;
    rep.require(decreasing, t.columns[col] + " strictly decreasing along the eps schedule");
    rep.require(t.rows.back()[col] < t.rows.front()[col] / 4.0,
                t.columns[col] + " final value below a quarter of the first");
  }
  {
    std::vector<double> eps_col, e2_col, e1top_col, e1top_bound_col;
    for (const auto& row : t.rows) {
      eps_col.push_back(row[0]);
      e2_col.push_back(row[2]);
      e1top_col.push_back(row[5]);
      e1top_bound_col.push_back(row[6]);
    }
    const double e2_exponent = fit_log_slope(eps_col, e2_col);
    rep.meta["e2_fitted_exponent"] = e2_exponent;
    rep.meta["e2_predicted_exponent"] = 2.0 * tau - 2.0;
    const double C = e1top_col[0] / e1top_bound_col[0];
    rep.meta["e1_top_bound_constant"] = C;
    bool ok = true;
    for (std::size_t i = 0; i < e1top_col.size(); ++i)
      if (e1top_col[i] > 10.0 * C * e1top_bound_col[i]) ok = false;
    rep.require(ok, "E1 top-segment values below 10x the max{C eps rho, 1} eps^(2tau-1) bound "
                    "with C calibrated on the first row");
  }
  rep.tables.emplace_back("", std::move(t));
  return rep;
}

// Sphere oracle vs polyhedral flux: both schedules, mutual agreement of the
// final entries within mass_rel_tol.
inline RunReport run_mass_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  const MetricField field = cfg.make_field();
  RunReport rep;
  rep.name = "mass_compare";
  Table ts;
  ts.columns = {"radius", "sphere_mass"};
  for (double r : cfg.sphere_radii)
    ts.add_row({r, sphere_mass(field, r, cfg.sphere_polar, cfg.sphere_azimuth)});
  Table tp;
  tp.columns = {"param", "poly_mass", "quad_error"};
  for (double L : cfg.box_schedule) {
    Polyhedron poly;
    if (cfg.poly_family == "box") {
      poly = make_box(-L, L, -L, L, 1.0 / L, L);
    } else if (cfg.poly_family == "cone") {
      poly = cone_polyhedron(cfg.cone_n, 1.0 / L, cfg.cone_s).poly;
    } else {
      throw ConfigError("config: unknown polyhedron family '" + cfg.poly_family + "'");
    }
    const MassBreakdown b = polyhedral_mass(field, poly, cfg.quad, cfg.threads);
    tp.add_row({L, b.flux_total, b.quad_error});
    rep.require(b.converged, "quadrature converged at size " + format_double(L));
  }
  const double ms = ts.rows.back()[1];
  const double mp = tp.rows.back()[1];
  const double scale = std::max({std::abs(ms), std::abs(mp), 1e-12});
  rep.require(std::abs(ms - mp) <= cfg.mass_rel_tol * scale,
              "final sphere mass " + format_double(ms) + " and final polyhedral mass " +
                  format_double(mp) + " agree within " + format_double(cfg.mass_rel_tol) +
                  " relative");
  rep.meta["final_sphere_mass"] = ms;
  rep.meta["final_poly_mass"] = mp;
  rep.tables.emplace_back("_sphere", std::move(ts));
  rep.tables.emplace_back("_poly", std::move(tp));
  return rep;
}

// Decay verification of the configured field along the radius schedule.
inline RunReport run_decay_check(const ExperimentConfig& cfg) {
  cfg.validate();
  const MetricField field = cfg.make_field();
  const DecayReport d = decay_check(field, cfg.decay_radii);
  RunReport rep;
  rep.name = "decay_check";
  Table t;
  t.columns = {"radius", "sup_norm", "ratio"};
  for (std::size_t i = 0; i < d.radii.size(); ++i)
    t.add_row({d.radii[i], d.sup_scaled[i], d.ratio[i]});
  rep.require(d.pass, "scaled decay sups non-increasing within factor 2 (tau = " +
                          format_double(field.tau) + ")");
  rep.meta["second_order_checked"] = d.second_order_checked;
  rep.tables.emplace_back("", std::move(t));
  return rep;
}

// Writes <name><suffix>.csv per table, <name>.json with rows + assertions +
// meta, and optional SVG charts for the sweep-style runs.
inline void emit_report(const RunReport& rep, const std::string& out_dir, bool emit_svg = true) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json j;
  j["name"] = rep.name;
  j["meta"] = rep.meta;
  j["passed"] = rep.passed();
  j["assertions"] = nlohmann::json::array();
  for (const auto& a : rep.assertions)
    j["assertions"].push_back({{"text", a.text}, {"passed", a.passed}});
  for (const auto& [suffix, table] : rep.tables) {
    write_csv(table, out_dir + "/" + rep.name + suffix + ".csv");
    j["tables"][rep.name + suffix] = {{"columns", table.columns},
                                      {"rows", table_to_json(table)}};
  }
  write_json(j, out_dir + "/" + rep.name + ".json");
  if (!emit_svg) return;
  if (rep.name == "theorem_check") {
    Table t = rep.tables[0].second;  // chart |residual| alongside the bounds
    for (auto& row : t.rows) row[4] = std::abs(row[4]);
    t.columns[4] = "abs_residual";
    write_svg_loglog(t, 0, {4, 5, 6}, "residual and error bounds vs size",
                     out_dir + "/theorem_check.svg");
  } else if (rep.name == "cone_sweep") {
    const Table& t = rep.tables[0].second;
    write_svg_loglog(t, 0, {1, 2, 3, 4}, "error integrals vs eps", out_dir + "/cone_sweep.svg");
  }
}

}  // namespace hypmass
