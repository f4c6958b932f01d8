#pragma once

// Small fixed-size linear algebra used throughout the library. No external
// dependency; everything is double precision and value-semantic.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hypmass {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator*(const Vec3& a, double s) { return s * a; }
inline Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  if (!(n > 0.0)) throw std::invalid_argument("normalized: zero vector");
  return a / n;
}

// Symmetric 3x3 matrix, six stored components.
struct Sym3 {
  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;

  double operator()(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i == 0) return j == 0 ? xx : (j == 1 ? xy : xz);
    if (i == 1) return j == 1 ? yy : yz;
    return zz;
  }
  double& at(int i, int j) {
    if (i > j) std::swap(i, j);
    if (i == 0) return j == 0 ? xx : (j == 1 ? xy : xz);
    if (i == 1) return j == 1 ? yy : yz;
    return zz;
  }

  static Sym3 identity() { return {1, 0, 0, 1, 0, 1}; }
  static Sym3 zero() { return {}; }
};

inline Sym3 operator+(const Sym3& a, const Sym3& b) {
  return {a.xx + b.xx, a.xy + b.xy, a.xz + b.xz, a.yy + b.yy, a.yz + b.yz, a.zz + b.zz};
}
inline Sym3 operator-(const Sym3& a, const Sym3& b) {
  return {a.xx - b.xx, a.xy - b.xy, a.xz - b.xz, a.yy - b.yy, a.yz - b.yz, a.zz - b.zz};
}
inline Sym3 operator*(double s, const Sym3& a) {
  return {s * a.xx, s * a.xy, s * a.xz, s * a.yy, s * a.yz, s * a.zz};
}

inline Vec3 apply(const Sym3& m, const Vec3& v) {
  return {m.xx * v.x + m.xy * v.y + m.xz * v.z,
          m.xy * v.x + m.yy * v.y + m.yz * v.z,
          m.xz * v.x + m.yz * v.y + m.zz * v.z};
}

inline double quad_form(const Sym3& m, const Vec3& a, const Vec3& b) { return dot(a, apply(m, b)); }

inline double det(const Sym3& m) {
  return m.xx * (m.yy * m.zz - m.yz * m.yz) - m.xy * (m.xy * m.zz - m.yz * m.xz) +
         m.xz * (m.xy * m.yz - m.yy * m.xz);
}

inline Sym3 inverse(const Sym3& m) {
  const double d = det(m);
  if (d == 0.0) throw std::domain_error("Sym3 inverse: singular matrix");
  Sym3 r;
  r.xx = (m.yy * m.zz - m.yz * m.yz) / d;
  r.xy = (m.xz * m.yz - m.xy * m.zz) / d;
  r.xz = (m.xy * m.yz - m.xz * m.yy) / d;
  r.yy = (m.xx * m.zz - m.xz * m.xz) / d;
  r.yz = (m.xy * m.xz - m.xx * m.yz) / d;
  r.zz = (m.xx * m.yy - m.xy * m.xy) / d;
  return r;
}

inline double frobenius(const Sym3& m) {
  return std::sqrt(m.xx * m.xx + m.yy * m.yy + m.zz * m.zz +
                   2.0 * (m.xy * m.xy + m.xz * m.xz + m.yz * m.yz));
}

inline double trace(const Sym3& m) { return m.xx + m.yy + m.zz; }

// True iff m - shift*I is positive definite (Cholesky without pivoting).
inline bool positive_definite_shifted(const Sym3& m, double shift) {
  const double a11 = m.xx - shift;
  if (a11 <= 0.0) return false;
  const double l11 = std::sqrt(a11);
  const double l21 = m.xy / l11;
  const double l31 = m.xz / l11;
  const double a22 = m.yy - shift - l21 * l21;
  if (a22 <= 0.0) return false;
  const double l22 = std::sqrt(a22);
  const double l32 = (m.yz - l31 * l21) / l22;
  const double a33 = m.zz - shift - l31 * l31 - l32 * l32;
  return a33 > 0.0;
}

// Symmetric 2x2, used for induced metrics on face tangent planes.
struct Sym2 {
  double a11 = 0, a12 = 0, a22 = 0;
};

inline double det(const Sym2& m) { return m.a11 * m.a22 - m.a12 * m.a12; }

inline Sym2 inverse(const Sym2& m) {
  const double d = det(m);
  if (d == 0.0) throw std::domain_error("Sym2 inverse: singular matrix");
  return {m.a22 / d, -m.a12 / d, m.a11 / d};
}

inline double clamp_unit(double v, double slack, const std::string& what) {
  if (v > 1.0 + slack || v < -1.0 - slack)
    throw std::domain_error(what + ": value " + std::to_string(v) + " outside [-1,1]");
  return v > 1.0 ? 1.0 : (v < -1.0 ? -1.0 : v);
}

}  // namespace hypmass
