#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qsample/kernels.hpp"
#include "qsample/qlinalg.hpp"

namespace qsample {

/// Symmetrized Nystrom discretization of the integral transform
///   (T F)(x) = int_D F(w) conj(E(w, x)) dw
/// and of K = T T*, on a quadrature grid with weights c_k:
///   T(k, j) = sqrt(c_k) conj(E(w_k, w_j)) sqrt(c_j)
///   K(k, j) = sqrt(c_k) S(w_j, w_k) sqrt(c_j)
/// Both act on rows u_k = sqrt(c_k) F(w_k). K uses the closed-form S for
/// built-in kernels and the product T T* for tabulated ones.
struct NystromOperator {
  KernelSpec spec;
  QuadratureGrid grid;
  QMatrix T;
  QMatrix K;
};

struct BuildOptions {
  bool check_admissibility = true;
  std::size_t admissibility_trials = 20;
};

/// Throws std::invalid_argument when the kernel fails admissibility.
NystromOperator build(const KernelSpec& spec, const QuadratureGrid& grid, const BuildOptions& opts = {});

/// ||T T* - T* T|| / ||T||^2.
double normality_defect(const NystromOperator& op);
/// ||K - T T*|| / ||T||^2, comparing the kernel matrix with the product of
/// transforms (zero by construction for tabulated kernels).
double kernel_defect(const NystromOperator& op);
/// sum_k c_k S(w_k, w_k).
double kernel_trace(const NystromOperator& op);

/// Retained discrete eigensystem. For mode n:
///   Phi[n][k]        grid values Phi_n(w_k), orthonormal under sum_k c_k (.)(.)^-
///   lambda[n]        eigenvalue of T (canonical representative, left factor)
///   mu[n]            eigenvalue of K, Rayleigh quotient of K at Phi_n
/// all_mu holds the full spectrum of K with no floor applied. residuals are
/// the eigenpair residuals of T (empty for tensor bases).
/// The extended eigenfunction is phi_n = T Phi_n, equal to lambda_n Phi_n on D.
struct PsqwsBasis {
  KernelSpec spec;
  QuadratureGrid grid;
  double retention_floor = 0.0;
  std::vector<QVector> Phi;
  std::vector<Quaternion> lambda;
  std::vector<double> mu;
  std::vector<double> all_mu;
  std::vector<double> residuals;
  /// For tensor bases, the 1D mode pair (m, n) behind each mode.
  std::vector<std::pair<std::size_t, std::size_t>> tensor_index;

  std::size_t count() const { return Phi.size(); }
  /// phi_n(w_k) = lambda_n Phi_n(w_k).
  Quaternion phi_at_node(std::size_t n, std::size_t k) const { return lambda[n] * Phi[n][k]; }
};

/// Eigensystem of the discretized operator. Modes with mu < floor * mu_1 are
/// dropped; a floor of 1 keeps only the leading mode (and any mode tied with
/// it); a floor of 0 keeps the complete eigenbasis. Each Phi_n is phase-normalized so its largest entry points along a
/// deterministic direction that commutes with lambda_n.
PsqwsBasis eigensystem(const NystromOperator& op, double retention_floor = 1e-12,
                       const SpectralOptions& opts = {});

/// phi_n(x) = lambda_n^-1 sum_k c_k phi_n(w_k) conj(E(w_k, x)).
Quaternion extend(const PsqwsBasis& basis, std::size_t n, const Point& x);
/// phi_0(x) ... phi_{modes-1}(x) sharing one kernel evaluation per node.
std::vector<Quaternion> extend_all(const PsqwsBasis& basis, const Point& x, std::size_t modes);

/// Residual of int_D phi_n(y) S(x, y) dy = mu_n phi_n(x) at x, by quadrature.
Quaternion kernel_equation_residual(const PsqwsBasis& basis, std::size_t n, const Point& x);

/// 2D basis assembled from a 1D basis of the same sigma and tau:
///   Phi_mn(w) = Phi_m(w1) Phi_n(w2)          (real-valued factors)
///   lambda_mn = (pi / sigma) lambda_n^(j) lambda_m^(i)
///   mu_mn     = (pi / sigma)^2 mu_m mu_n
/// where lambda^(j) is lambda with its i part moved to j. The grid is the
/// tensor square of the 1D grid. all_mu holds all products of the 1D
/// all_mu values.
PsqwsBasis tensor_eigensystem(const KernelSpec& spec2d, const PsqwsBasis& basis1d, double retention_floor = 1e-12);

/// Ratio linking the tensor spectrum to 1D spectra, mu_mn / (mu_m mu_n).
double tensor_constant(double sigma);

struct TensorReport {
  std::size_t direct_nodes = 0;
  std::size_t compared = 0;
  std::vector<double> direct_mu;
  std::vector<double> tensor_mu;
  double worst_mu_rel = 0.0;
  /// mu_1(direct 2D) / mu_1(1D)^2, to be compared with tensor_constant.
  double fitted_constant = 0.0;
  double analytic_constant = 0.0;
  /// Index pairs (in the direct spectrum) that form 2-clusters, and the
  /// number of such pairs the tensor spectrum predicts in the compared range.
  std::vector<std::pair<std::size_t, std::size_t>> direct_pairs;
  std::size_t predicted_pairs = 0;
  /// |(tensor Phi_00, direct Phi_1)| on the direct grid.
  double phi00_correlation = 0.0;
  /// Largest 2D kernel-equation residual of tensor eigenfunctions, relative
  /// to max |phi|.
  double worst_tensor_residual = 0.0;
};

TensorReport cross_validate_tensor(const KernelSpec& spec2d, const PsqwsBasis& basis1d,
                                   std::size_t direct_nodes = 24, std::size_t top = 10,
                                   std::uint64_t seed = 1);

struct ExpansionLevel {
  std::size_t modes = 0;
  /// max over tested x of the L2(D) norm in w of E(w, x) - sum conj(phi_n(x)) lambda_n^-1 phi_n(w)
  double e_residual = 0.0;
  /// max over tested x of |E(w, x) - series| at the tested w
  double e_pointwise = 0.0;
  /// max over tested pairs of |S(x, y) - sum conj(phi_n(y)) phi_n(x)|
  double s_residual = 0.0;
  /// max over tested x of S(x, x) - sum |phi_n(x)|^2
  double s_diagonal = 0.0;
};

struct ExpansionReport {
  std::vector<ExpansionLevel> levels;
  bool e_monotone = false;
  bool s_diagonal_monotone = false;
};

/// Truncated kernel expansions at the given (w, x) pairs, for truncation
/// levels 0, 1, 2, 4, ... and the full basis. The S-expansion is tested at
/// (x, y) = (w, x) of each pair.
ExpansionReport expansion_residuals(const PsqwsBasis& basis, const std::vector<std::pair<Point, Point>>& points);

}  // namespace qsample
