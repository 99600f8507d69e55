#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qsample/qlinalg.hpp"
#include "qsample/quaternion.hpp"

namespace qsample::testing {

inline Quaternion random_quaternion(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  const double w = d(rng);
  const double x = d(rng);
  const double y = d(rng);
  const double z = d(rng);
  return {w, x, y, z};
}

inline Quaternion random_unit(std::mt19937_64& rng) {
  Quaternion q;
  do {
    q = random_quaternion(rng);
  } while (norm(q) < 1e-3);
  return q / norm(q);
}

inline QVector random_vector(std::mt19937_64& rng, std::size_t n) {
  QVector v(n);
  for (auto& q : v) q = random_quaternion(rng);
  return v;
}

inline QMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  QMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (auto& q : m.row(r)) q = random_quaternion(rng);
  return m;
}

/// Random unitary: its rows form an orthonormal basis of H^n.
inline QMatrix random_unitary(std::mt19937_64& rng, std::size_t n) {
  std::vector<QVector> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(random_vector(rng, n));
  const auto ortho = gram_schmidt(rows);
  QMatrix u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) = ortho[i][j];
  return u;
}

/// Normal matrix whose row eigenvectors are the rows of `u` with eigenvalues
/// `lambdas`: M = U* diag(lambda) U.
inline QMatrix planted_normal(const QMatrix& u, const std::vector<Quaternion>& lambdas) {
  return product(product(adjoint(u), QMatrix::diagonal(lambdas)), u);
}

inline double max_abs_diff(const QVector& a, const QVector& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, qsample::max_abs_diff(a[k], b[k]));
  return worst;
}

/// Cyclic Jacobi eigenvalues of a complex Hermitian matrix, ascending.
/// Independent of the library eigensolvers; used as a test oracle.
inline std::vector<double> jacobi_hermitian_eigenvalues(std::vector<std::vector<std::complex<double>>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) {
        total += std::norm(a[p][q]);
        if (p != q) off += std::norm(a[p][q]);
      }
    if (off <= 1e-30 * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const std::complex<double> apq = a[p][q];
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        // Rotate in the (p, q) plane to annihilate a[p][q].
        const std::complex<double> phase = apq / mag;
        const double app = a[p][p].real();
        const double aqq = a[q][q].real();
        const double theta = 0.5 * std::atan2(2.0 * mag, aqq - app);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        for (std::size_t k = 0; k < n; ++k) {
          const auto akp = a[k][p];
          const auto akq = a[k][q];
          a[k][p] = c * akp - s * std::conj(phase) * akq;
          a[k][q] = s * phase * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const auto apk = a[p][k];
          const auto aqk = a[q][k];
          a[p][k] = c * apk - s * phase * aqk;
          a[q][k] = s * std::conj(phase) * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i].real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace qsample::testing
