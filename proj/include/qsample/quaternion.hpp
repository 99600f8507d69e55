#pragma once

#include <cmath>
#include <complex>
#include <iosfwd>
#include <stdexcept>

namespace qsample {

/// Element of the quaternion skew field, stored as w + x i + y j + z k.
struct Quaternion {
  double w = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double w_, double x_ = 0.0, double y_ = 0.0, double z_ = 0.0)
      : w(w_), x(x_), y(y_), z(z_) {}

  static constexpr Quaternion i() { return {0.0, 1.0, 0.0, 0.0}; }
  static constexpr Quaternion j() { return {0.0, 0.0, 1.0, 0.0}; }
  static constexpr Quaternion k() { return {0.0, 0.0, 0.0, 1.0}; }

  constexpr Quaternion& operator+=(const Quaternion& o) {
    w += o.w; x += o.x; y += o.y; z += o.z;
    return *this;
  }
  constexpr Quaternion& operator-=(const Quaternion& o) {
    w -= o.w; x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
  constexpr Quaternion& operator*=(double s) {
    w *= s; x *= s; y *= s; z *= s;
    return *this;
  }
  constexpr Quaternion& operator/=(double s) {
    w /= s; x /= s; y /= s; z /= s;
    return *this;
  }
};

constexpr Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
constexpr Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
constexpr Quaternion operator-(const Quaternion& a) { return {-a.w, -a.x, -a.y, -a.z}; }
constexpr Quaternion operator*(Quaternion a, double s) { return a *= s; }
constexpr Quaternion operator*(double s, Quaternion a) { return a *= s; }
constexpr Quaternion operator/(Quaternion a, double s) { return a /= s; }

/// Hamilton product. Not commutative.
constexpr Quaternion operator*(const Quaternion& p, const Quaternion& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

constexpr Quaternion mul(const Quaternion& p, const Quaternion& q) { return p * q; }

constexpr Quaternion conj(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

constexpr double norm2(const Quaternion& q) {
  return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}

/// |q|, rescaled so that tiny or huge components neither underflow nor overflow.
inline double norm(const Quaternion& q) {
  const double n2 = norm2(q);
  if (n2 > 1e-290 && n2 < 1e290) return std::sqrt(n2);
  const double s = std::fmax(std::fmax(std::fabs(q.w), std::fabs(q.x)),
                             std::fmax(std::fabs(q.y), std::fabs(q.z)));
  if (s == 0.0 || !std::isfinite(s)) return s;
  return s * std::sqrt(norm2(q / s));
}

constexpr double scalar_part(const Quaternion& q) { return q.w; }
constexpr Quaternion vector_part(const Quaternion& q) { return {0.0, q.x, q.y, q.z}; }

/// Below this magnitude a quaternion is treated as zero by inverse().
inline constexpr double kInverseThreshold = 1e-300;

/// conj(q) / |q|^2. Throws std::domain_error when |q| < kInverseThreshold.
Quaternion inverse(const Quaternion& q);

/// The element a + b i (b >= 0) of the similarity orbit { u q u^-1 } that lies
/// in the closed upper half of the i-complex plane: a = Sc(q), b = |Vec(q)|.
inline std::complex<double> canonical_complex_representative(const Quaternion& q) {
  return {q.w, std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z)};
}

/// A unit u with q = u (a + b i) u^-1, where a + b i is the canonical
/// representative of q. Returns 1 when q already lies in the i-complex plane
/// with nonnegative i part.
Quaternion canonical_similarity(const Quaternion& q);

/// cos(angle) + axis sin(angle). `axis` must be a unit pure quaternion.
Quaternion cis(const Quaternion& axis, double angle);

inline Quaternion cis_i(double angle) { return {std::cos(angle), std::sin(angle), 0.0, 0.0}; }
inline Quaternion cis_j(double angle) { return {std::cos(angle), 0.0, std::sin(angle), 0.0}; }

/// Largest componentwise absolute difference.
inline double max_abs_diff(const Quaternion& a, const Quaternion& b) {
  return std::fmax(std::fmax(std::fabs(a.w - b.w), std::fabs(a.x - b.x)),
                   std::fmax(std::fabs(a.y - b.y), std::fabs(a.z - b.z)));
}

std::ostream& operator<<(std::ostream& os, const Quaternion& q);

}  // namespace qsample
