#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "qsample/quaternion.hpp"

namespace qsample {

/// Raised when an iterative or recovery step of a spectral routine fails.
class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense vector over H, an element of the left module H^n.
class QVector {
 public:
  QVector() = default;
  explicit QVector(std::size_t n) : data_(n) {}
  QVector(std::initializer_list<Quaternion> init) : data_(init) {}
  explicit QVector(std::vector<Quaternion> data) : data_(std::move(data)) {}

  std::size_t size() const { return data_.size(); }
  Quaternion& operator[](std::size_t i) { return data_[i]; }
  const Quaternion& operator[](std::size_t i) const { return data_[i]; }

  std::span<Quaternion> span() { return data_; }
  std::span<const Quaternion> span() const { return data_; }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  static QVector basis(std::size_t n, std::size_t k) {
    QVector e(n);
    e[k] = Quaternion(1.0);
    return e;
  }

 private:
  std::vector<Quaternion> data_;
};

/// Dense row-major quaternion matrix acting on row vectors from the right:
///   apply(M, u)_j = sum_k u_k M(k, j).
/// Left scalar multiples pass straight through, so every QMatrix is a left
/// H-linear operator.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  QMatrix(std::initializer_list<std::initializer_list<Quaternion>> rows);

  static QMatrix identity(std::size_t n);
  static QMatrix diagonal(std::span<const Quaternion> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Quaternion& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Quaternion& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Quaternion> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Quaternion> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Quaternion> data_;
};

/// (u, v) = sum_k u_k conj(v_k). Left-linear in u, conjugate-linear in v.
Quaternion inner(const QVector& u, const QVector& v);
double norm(const QVector& u);

/// q u, scaling every entry from the left.
QVector scale(const Quaternion& q, const QVector& u);
QVector operator+(const QVector& a, const QVector& b);
QVector operator-(const QVector& a, const QVector& b);
/// u += q v
void axpy(const Quaternion& q, const QVector& v, QVector& u);

QVector apply(const QMatrix& m, const QVector& u);
QMatrix adjoint(const QMatrix& m);

/// Ordinary matrix product P * Q. Under the row action this is "P, then Q":
///   apply(product(P, Q), u) == apply(Q, apply(P, u)).
QMatrix product(const QMatrix& p, const QMatrix& q);
QMatrix operator-(const QMatrix& a, const QMatrix& b);
QMatrix scale(const QMatrix& m, double s);
double frobenius_norm(const QMatrix& m);

/// 2n x 2n complex image of a square quaternion matrix.
struct ComplexAdjoint {
  Eigen::MatrixXcd matrix;
};

/// Writes each entry q = a + b j with a = q.w + q.x i, b = q.y + q.z i and
/// assembles [[A, B], [-conj(B), conj(A)]]. embed(product(P, Q)) equals
/// embed(P) * embed(Q).
ComplexAdjoint embed(const QMatrix& m);

struct SpectralOptions {
  /// ||M - M*|| allowed relative to ||M|| for eig_selfadjoint.
  double adjoint_tol = 1e-10;
  /// ||M M* - M* M|| allowed relative to ||M||^2 for eig_normal.
  double normality_tol = 1e-8;
  /// Consecutive eigenvalues of M M* closer than this times the largest one
  /// share an eigenspace.
  double cluster_tol = 1e-6;
  /// ||apply(M, xi) - lambda xi|| allowed relative to ||M||.
  double residual_tol = 1e-8;
};

/// Eigenpairs apply(M, xi_k) = lambda_k xi_k, sorted by |lambda| descending,
/// ties broken by canonical representative (real part, then imaginary part,
/// both descending).
struct SpectralDecomposition {
  std::vector<Quaternion> eigenvalues;
  std::vector<QVector> eigenvectors;
  std::vector<double> residuals;

  std::size_t size() const { return eigenvalues.size(); }
  double mu(std::size_t k) const { return norm2(eigenvalues[k]); }
};

/// Spectrum of a self-adjoint matrix. Eigenvalues are real; eigenvectors are
/// orthonormal under inner().
SpectralDecomposition eig_selfadjoint(const QMatrix& m, const SpectralOptions& opts = {});

/// Spectrum of a normal matrix, computed by diagonalizing M M* and then M
/// restricted to each eigenspace of M M*. Eigenvalues are reported as
/// canonical representatives a + b i with b >= 0.
SpectralDecomposition eig_normal(const QMatrix& m, const SpectralOptions& opts = {});

/// Same as eig_normal, reusing a decomposition of K = M M* and resolving only
/// the leading `count` eigenvectors of K. M is assumed normal.
SpectralDecomposition eig_normal_restricted(const QMatrix& m, const SpectralDecomposition& k_decomp,
                                            std::size_t count, const SpectralOptions& opts = {});

/// Left Gram-Schmidt. Throws SpectralError when a vector loses more than
/// (1 - tol) of its norm to the span of its predecessors.
std::vector<QVector> gram_schmidt(const std::vector<QVector>& vs, double tol = 1e-10);

/// Order used for all spectra: |lambda| descending, then canonical real part
/// descending, then canonical imaginary part descending.
bool spectral_order(const Quaternion& a, const Quaternion& b);

}  // namespace qsample
