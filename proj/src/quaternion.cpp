#include "qsample/quaternion.hpp"

#include <ostream>

namespace qsample {

Quaternion inverse(const Quaternion& q) {
  const double n = norm(q);
  if (!(n >= kInverseThreshold)) {
    throw std::domain_error("quaternion inverse: |q| below inversion threshold");
  }
  // Divide in two steps so |q| near the threshold does not underflow n*n.
  return (conj(q) / n) / n;
}

Quaternion cis(const Quaternion& axis, double angle) {
  constexpr double tol = 1e-12;
  if (std::fabs(axis.w) > tol) {
    throw std::invalid_argument("cis: axis must be a pure quaternion");
  }
  if (std::fabs(norm(axis) - 1.0) > tol) {
    throw std::invalid_argument("cis: axis must have unit norm");
  }
  const double s = std::sin(angle);
  return {std::cos(angle), axis.x * s, axis.y * s, axis.z * s};
}

Quaternion canonical_similarity(const Quaternion& q) {
  const Quaternion v = vector_part(q);
  const double vn = norm(v);
  if (vn == 0.0) return Quaternion(1.0);
  const Quaternion b = v / vn;
  // Rotation taking i to b is (1 - b i) / |1 - b i|, which degenerates near
  // b = -i. For b in the half space x < 0, rotate b by pi about j first.
  const auto toward = [](const Quaternion& target) {
    const Quaternion r = Quaternion(1.0) - target * Quaternion::i();
    return r / norm(r);
  };
  if (b.x >= 0.0) return toward(b);
  const Quaternion flipped = conj(Quaternion::j()) * b * Quaternion::j();
  return Quaternion::j() * toward(flipped);
}

std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
  return os << '(' << q.w << ", " << q.x << ", " << q.y << ", " << q.z << ')';
}

}  // namespace qsample
