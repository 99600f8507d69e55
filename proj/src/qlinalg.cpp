#include "qsample/qlinalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace qsample {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Sort permutation for spectra. |lambda| equal within a relative 1e-12 is a tie.
std::vector<std::size_t> spectral_permutation(const std::vector<Quaternion>& lambdas) {
  std::vector<std::size_t> idx(lambdas.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return norm(lambdas[a]) > norm(lambdas[b]);
  });
  std::size_t start = 0;
  while (start < idx.size()) {
    std::size_t stop = start + 1;
    const double head = norm(lambdas[idx[start]]);
    while (stop < idx.size() &&
           head - norm(lambdas[idx[stop]]) <= 1e-12 * std::max(head, 1e-300)) {
      ++stop;
    }
    std::stable_sort(idx.begin() + static_cast<std::ptrdiff_t>(start),
                     idx.begin() + static_cast<std::ptrdiff_t>(stop),
                     [&](std::size_t a, std::size_t b) {
                       const auto ca = canonical_complex_representative(lambdas[a]);
                       const auto cb = canonical_complex_representative(lambdas[b]);
                       if (ca.real() != cb.real()) return ca.real() > cb.real();
                       return ca.imag() > cb.imag();
                     });
    start = stop;
  }
  return idx;
}

SpectralDecomposition permuted(SpectralDecomposition sd) {
  const auto idx = spectral_permutation(sd.eigenvalues);
  SpectralDecomposition out;
  out.eigenvalues.reserve(idx.size());
  out.eigenvectors.reserve(idx.size());
  out.residuals.reserve(idx.size());
  for (auto i : idx) {
    out.eigenvalues.push_back(sd.eigenvalues[i]);
    out.eigenvectors.push_back(std::move(sd.eigenvectors[i]));
    out.residuals.push_back(sd.residuals[i]);
  }
  return out;
}

double pair_residual(const QMatrix& m, const Quaternion& lambda, const QVector& xi) {
  return norm(apply(m, xi) - scale(lambda, xi));
}

}  // namespace

QMatrix::QMatrix(std::initializer_list<std::initializer_list<Quaternion>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "QMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

QMatrix QMatrix::identity(std::size_t n) {
  QMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Quaternion(1.0);
  return m;
}

QMatrix QMatrix::diagonal(std::span<const Quaternion> d) {
  QMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Quaternion inner(const QVector& u, const QVector& v) {
  require(u.size() == v.size(), "inner: length mismatch");
  Quaternion acc;
  for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * conj(v[k]);
  return acc;
}

double norm(const QVector& u) {
  double acc = 0.0;
  for (const auto& q : u) acc += norm2(q);
  return std::sqrt(acc);
}

QVector scale(const Quaternion& q, const QVector& u) {
  QVector out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = q * u[k];
  return out;
}

QVector operator+(const QVector& a, const QVector& b) {
  require(a.size() == b.size(), "vector add: length mismatch");
  QVector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k];
  return out;
}

QVector operator-(const QVector& a, const QVector& b) {
  require(a.size() == b.size(), "vector subtract: length mismatch");
  QVector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

void axpy(const Quaternion& q, const QVector& v, QVector& u) {
  require(u.size() == v.size(), "axpy: length mismatch");
  for (std::size_t k = 0; k < u.size(); ++k) u[k] += q * v[k];
}

QVector apply(const QMatrix& m, const QVector& u) {
  require(m.rows() == u.size(), "apply: dimension mismatch");
  QVector out(m.cols());
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const Quaternion uk = u[k];
    const auto row = m.row(k);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += uk * row[j];
  }
  return out;
}

QMatrix adjoint(const QMatrix& m) {
  QMatrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = conj(m(r, c));
  return out;
}

QMatrix product(const QMatrix& p, const QMatrix& q) {
  require(p.cols() == q.rows(), "product: dimension mismatch");
  QMatrix out(p.rows(), q.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < p.cols(); ++k) {
      const Quaternion pik = p(i, k);
      const auto qrow = q.row(k);
      for (std::size_t j = 0; j < q.cols(); ++j) orow[j] += pik * qrow[j];
    }
  }
  return out;
}

QMatrix operator-(const QMatrix& a, const QMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix subtract: shape mismatch");
  QMatrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - b(r, c);
  return out;
}

QMatrix scale(const QMatrix& m, double s) {
  QMatrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (auto& q : out.row(r)) q *= s;
  return out;
}

double frobenius_norm(const QMatrix& m) {
  double acc = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (const auto& q : m.row(r)) acc += norm2(q);
  return std::sqrt(acc);
}

ComplexAdjoint embed(const QMatrix& m) {
  require(m.square(), "embed: matrix must be square");
  const auto n = static_cast<Eigen::Index>(m.rows());
  ComplexAdjoint out{Eigen::MatrixXcd::Zero(2 * n, 2 * n)};
  auto& c = out.matrix;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      const Quaternion& q = m(static_cast<std::size_t>(r), static_cast<std::size_t>(s));
      const std::complex<double> a{q.w, q.x};
      const std::complex<double> b{q.y, q.z};
      c(r, s) = a;
      c(r, s + n) = b;
      c(r + n, s) = -std::conj(b);
      c(r + n, s + n) = std::conj(a);
    }
  }
  return out;
}

bool spectral_order(const Quaternion& a, const Quaternion& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (std::fabs(na - nb) > 1e-12 * std::max({na, nb, 1e-300})) return na > nb;
  const auto ca = canonical_complex_representative(a);
  const auto cb = canonical_complex_representative(b);
  if (ca.real() != cb.real()) return ca.real() > cb.real();
  return ca.imag() > cb.imag();
}

std::vector<QVector> gram_schmidt(const std::vector<QVector>& vs, double tol) {
  std::vector<QVector> out;
  out.reserve(vs.size());
  for (std::size_t idx = 0; idx < vs.size(); ++idx) {
    const double n0 = norm(vs[idx]);
    QVector u = vs[idx];
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : out) axpy(-inner(u, e), e, u);
    }
    const double n1 = norm(u);
    if (!(n1 > tol * n0) || n0 == 0.0) {
      throw SpectralError("gram_schmidt: vector " + std::to_string(idx) +
                          " is linearly dependent on its predecessors");
    }
    for (auto& q : u) q /= n1;
    out.push_back(std::move(u));
  }
  return out;
}

// Self-adjoint path: quaternion Householder reduction to a Hermitian
// tridiagonal matrix, a diagonal unitary that makes the off-diagonal real, and
// a real symmetric tridiagonal eigensolve. Work is done on the standard
// (column) form A v = v lambda; the row eigenvector is conj(v).
SpectralDecomposition eig_selfadjoint(const QMatrix& m, const SpectralOptions& opts) {
  require(m.square(), "eig_selfadjoint: matrix must be square");
  const std::size_t n = m.rows();
  if (n == 0) return {};
  const double mnorm = frobenius_norm(m);
  const QMatrix madj = adjoint(m);
  const double asym = frobenius_norm(m - madj);
  if (asym > opts.adjoint_tol * std::max(mnorm, 1e-300)) {
    throw std::invalid_argument("eig_selfadjoint: matrix is not self-adjoint (||M - M*|| = " +
                                std::to_string(asym) + ")");
  }

  QMatrix a(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a(r, c) = 0.5 * (m(r, c) + madj(r, c));

  struct Reflector {
    std::vector<Quaternion> u;  // supported on rows k+1..n-1
    double tau = 0.0;
  };
  std::vector<Reflector> reflectors(n > 2 ? n - 2 : 0);
  std::vector<Quaternion> pvec(n);
  std::vector<Quaternion> qvec(n);

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t off = k + 1;
    const std::size_t len = n - off;
    double xnorm2 = 0.0;
    for (std::size_t i = off; i < n; ++i) xnorm2 += norm2(a(i, k));
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm <= 1e-300) continue;
    const Quaternion x0 = a(off, k);
    const double a0 = norm(x0);
    const Quaternion phase = a0 > 0.0 ? x0 / a0 : Quaternion(1.0);

    auto& refl = reflectors[k];
    refl.u.assign(len, Quaternion{});
    for (std::size_t i = 0; i < len; ++i) refl.u[i] = a(off + i, k);
    refl.u[0] = phase * (a0 + xnorm);
    refl.tau = 1.0 / (xnorm2 + xnorm * a0);
    const auto& u = refl.u;
    const double tau = refl.tau;

    // p = tau B u, B the trailing block.
    for (std::size_t i = 0; i < len; ++i) {
      Quaternion acc;
      const auto brow = a.row(off + i);
      for (std::size_t j = 0; j < len; ++j) acc += brow[off + j] * u[j];
      pvec[i] = tau * acc;
    }
    double uhp = 0.0;
    for (std::size_t i = 0; i < len; ++i) uhp += (conj(u[i]) * pvec[i]).w;
    const double kc = 0.5 * tau * uhp;
    for (std::size_t i = 0; i < len; ++i) qvec[i] = pvec[i] - kc * u[i];
    for (std::size_t i = 0; i < len; ++i) {
      auto brow = a.row(off + i);
      for (std::size_t j = 0; j < len; ++j) {
        brow[off + j] -= u[i] * conj(qvec[j]) + qvec[i] * conj(u[j]);
      }
    }
    const Quaternion alpha = -(phase * xnorm);
    a(off, k) = alpha;
    a(k, off) = conj(alpha);
    for (std::size_t i = off + 1; i < n; ++i) {
      a(i, k) = Quaternion{};
      a(k, i) = Quaternion{};
    }
  }

  Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
  std::vector<Quaternion> phases(n, Quaternion(1.0));
  for (std::size_t i = 0; i < n; ++i) diag(static_cast<Eigen::Index>(i)) = a(i, i).w;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Quaternion alpha = a(i + 1, i);
    const double e = norm(alpha);
    sub(static_cast<Eigen::Index>(i)) = e;
    phases[i + 1] = e > 0.0 ? (alpha * phases[i]) / e : Quaternion(1.0);
  }

  Eigen::MatrixXd z;
  Eigen::VectorXd evals;
  if (n == 1) {
    z = Eigen::MatrixXd::Identity(1, 1);
    evals = diag;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (tri.info() != Eigen::Success) {
      throw SpectralError("eig_selfadjoint: tridiagonal eigensolver did not converge");
    }
    z = tri.eigenvectors();
    evals = tri.eigenvalues();
  }

  // V = H_0 ... H_{n-3} (Phase Z); column c of V is a right eigenvector.
  QMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < n; ++c)
      v(i, c) = phases[i] * z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
  std::vector<Quaternion> s(n);
  for (std::size_t kk = reflectors.size(); kk-- > 0;) {
    const auto& refl = reflectors[kk];
    if (refl.u.empty()) continue;
    const std::size_t off = kk + 1;
    const std::size_t len = n - off;
    std::fill(s.begin(), s.end(), Quaternion{});
    for (std::size_t i = 0; i < len; ++i) {
      const Quaternion cu = conj(refl.u[i]);
      const auto vrow = v.row(off + i);
      for (std::size_t c = 0; c < n; ++c) s[c] += cu * vrow[c];
    }
    for (auto& q : s) q *= refl.tau;
    for (std::size_t i = 0; i < len; ++i) {
      const Quaternion ui = refl.u[i];
      auto vrow = v.row(off + i);
      for (std::size_t c = 0; c < n; ++c) vrow[c] -= ui * s[c];
    }
  }

  SpectralDecomposition sd;
  sd.eigenvalues.reserve(n);
  sd.eigenvectors.reserve(n);
  sd.residuals.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    QVector xi(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = conj(v(i, c));
    const Quaternion lambda(evals(static_cast<Eigen::Index>(c)));
    sd.residuals.push_back(pair_residual(m, lambda, xi));
    sd.eigenvalues.push_back(lambda);
    sd.eigenvectors.push_back(std::move(xi));
  }
  return permuted(std::move(sd));
}

namespace {

struct RestrictedPairs {
  std::vector<Quaternion> lambdas;
  std::vector<QVector> vectors;
  std::vector<double> residuals;
};

// Diagonalizes M restricted to span(basis), an invariant subspace of the
// normal matrix M. The restriction R(a, b) = (M xi_a, xi_b) acts on
// coefficient rows; its eigenpairs c R = lambda c come from right eigenpairs
// of R* through the complex adjoint, using only eigenvalues in the closed
// lower half plane so that lambda = conj(nu) lands in the upper half.
RestrictedPairs diagonalize_restriction(const QMatrix& m, const std::vector<QVector>& basis) {
  const std::size_t dim = basis.size();
  std::vector<QVector> images;
  images.reserve(dim);
  for (const auto& b : basis) images.push_back(apply(m, b));
  QMatrix r(dim, dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) r(a, b) = inner(images[a], basis[b]);

  const auto chi = embed(adjoint(r)).matrix;
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(chi);
  if (schur.info() != Eigen::Success) {
    throw SpectralError("eig_normal: complex Schur decomposition did not converge");
  }
  const auto& tri = schur.matrixT();
  const auto& u = schur.matrixU();
  const auto n2 = static_cast<Eigen::Index>(2 * dim);
  double spread = 0.0;
  for (Eigen::Index c = 0; c < n2; ++c) spread = std::max(spread, std::abs(tri(c, c)));
  const double real_tol = 1e-9 * std::max(spread, 1e-300);

  std::vector<QVector> cand;
  std::vector<Quaternion> cand_lambda;
  for (Eigen::Index c = 0; c < n2; ++c) {
    const std::complex<double> nu = tri(c, c);
    if (nu.imag() > real_tol) continue;
    QVector coeff(dim);
    for (std::size_t a = 0; a < dim; ++a) {
      const auto x = u(static_cast<Eigen::Index>(a), c);
      const auto y = u(static_cast<Eigen::Index>(a + dim), c);
      // v = x - conj(y) j, coefficient row entry conj(v).
      coeff[a] = Quaternion(x.real(), -x.imag(), y.real(), -y.imag());
    }
    cand.push_back(std::move(coeff));
    cand_lambda.push_back(Quaternion(nu.real(), std::fabs(nu.imag()), 0.0, 0.0));
  }
  if (cand.size() < dim) {
    throw SpectralError("eig_normal: too few eigenvector candidates in restricted eigenspace");
  }

  // Pivoted Gram-Schmidt: conjugate pairs of a real eigenvalue describe the
  // same quaternion line, so take the least dependent candidate each time.
  std::vector<bool> used(cand.size(), false);
  RestrictedPairs out;
  std::vector<QVector> chosen;
  for (std::size_t step = 0; step < dim; ++step) {
    std::size_t best = cand.size();
    double best_norm = -1.0;
    for (std::size_t c = 0; c < cand.size(); ++c) {
      if (used[c]) continue;
      const double nc = norm(cand[c]);
      if (nc > best_norm) {
        best_norm = nc;
        best = c;
      }
    }
    if (best == cand.size() || best_norm < 1e-6) {
      throw SpectralError("eig_normal: eigenvector recovery lost rank in restricted eigenspace");
    }
    used[best] = true;
    QVector e = cand[best];
    for (const auto& prev : chosen) axpy(-inner(e, prev), prev, e);
    const double ne = norm(e);
    for (auto& q : e) q /= ne;
    for (std::size_t c = 0; c < cand.size(); ++c) {
      if (!used[c]) axpy(-inner(cand[c], e), e, cand[c]);
    }
    chosen.push_back(e);

    QVector full(basis.front().size());
    for (std::size_t a = 0; a < dim; ++a) axpy(e[a], basis[a], full);
    out.lambdas.push_back(cand_lambda[best]);
    out.residuals.push_back(pair_residual(m, cand_lambda[best], full));
    out.vectors.push_back(std::move(full));
  }
  return out;
}

}  // namespace

SpectralDecomposition eig_normal_restricted(const QMatrix& m, const SpectralDecomposition& k_decomp,
                                            std::size_t count, const SpectralOptions& opts) {
  require(m.square(), "eig_normal: matrix must be square");
  count = std::min(count, k_decomp.size());
  SpectralDecomposition sd;
  if (count == 0) return sd;
  const double mnorm = frobenius_norm(m);
  const double top = k_decomp.eigenvalues.front().w;
  const double gap = opts.cluster_tol * std::max(top, 1e-300);
  const double allowed = opts.residual_tol * std::max(mnorm, 1e-300);

  std::size_t begin = 0;
  while (begin < count) {
    std::size_t end = begin + 1;
    while (end < count &&
           k_decomp.eigenvalues[end - 1].w - k_decomp.eigenvalues[end].w <= gap) {
      ++end;
    }
    std::vector<QVector> basis(k_decomp.eigenvectors.begin() + static_cast<std::ptrdiff_t>(begin),
                               k_decomp.eigenvectors.begin() + static_cast<std::ptrdiff_t>(end));
    auto pairs = diagonalize_restriction(m, basis);
    const auto worst = [&] {
      return *std::max_element(pairs.residuals.begin(), pairs.residuals.end());
    };
    if (worst() > allowed) {
      pairs = diagonalize_restriction(m, gram_schmidt(basis));
      if (worst() > allowed) {
        throw SpectralError("eig_normal: eigenpair residual " + std::to_string(worst()) +
                            " exceeds tolerance " + std::to_string(allowed));
      }
    }
    for (std::size_t i = 0; i < pairs.lambdas.size(); ++i) {
      sd.eigenvalues.push_back(pairs.lambdas[i]);
      sd.eigenvectors.push_back(std::move(pairs.vectors[i]));
      sd.residuals.push_back(pairs.residuals[i]);
    }
    begin = end;
  }
  return permuted(std::move(sd));
}

SpectralDecomposition eig_normal(const QMatrix& m, const SpectralOptions& opts) {
  require(m.square(), "eig_normal: matrix must be square");
  if (m.rows() == 0) return {};
  const QMatrix madj = adjoint(m);
  const QMatrix mm = product(madj, m);  // operator M M*: M* first, then M
  const double mnorm = frobenius_norm(m);
  const double defect = frobenius_norm(mm - product(m, madj));
  if (defect > opts.normality_tol * std::max(mnorm * mnorm, 1e-300)) {
    throw std::invalid_argument("eig_normal: matrix is not normal (||MM* - M*M|| = " +
                                std::to_string(defect) + ")");
  }
  SpectralOptions kopts = opts;
  kopts.adjoint_tol = std::max(opts.adjoint_tol, 1e-12);
  const auto kd = eig_selfadjoint(mm, kopts);
  return eig_normal_restricted(m, kd, kd.size(), opts);
}

}  // namespace qsample
