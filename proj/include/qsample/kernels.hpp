#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qsample/quaternion.hpp"

namespace qsample {

/// A point of R^d, d in {1, 2}. Unused coordinates stay zero.
using Point = std::array<double, 2>;

/// Tensor-product quadrature on D = [-tau, tau]^dim. Nodes are ordered with
/// the last axis fastest: node (i1, i2) has index i1 * n_per_axis + i2.
struct QuadratureGrid {
  int dim = 1;
  double tau = 1.0;
  std::size_t n_per_axis = 0;
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre_rule(std::size_t n);

QuadratureGrid gauss_legendre_grid(int dim, double tau, std::size_t n_per_axis);

/// E(w, x) = sqrt(sigma / (2 pi tau)) exp(-i sigma x w / tau) on [-tau, tau].
/// Normalized so that S(x, y) = sin(sigma (y - x)) / (pi (y - x)).
struct Sinc1D {
  double sigma = 1.0;
  double tau = 1.0;
};

/// E(w, x) = (1 / 2 tau) exp(-i sigma x1 w1 / tau) exp(-j sigma x2 w2 / tau)
/// on [-tau, tau]^2, with S(x, y) = sinc(sigma (x1 - y1)) sinc(sigma (x2 - y2)).
struct QftSeparable2D {
  double sigma = 1.0;
  double tau = 1.0;
};

/// E sampled on a tensor grid of (w, x) coordinates and interpolated
/// multilinearly. Axes are [w1, (w2,) x1, (x2)]; values are row-major over
/// them. The w range must be symmetric, [-tau, tau]^dim.
struct Tabulated {
  int dim = 1;
  double tau = 1.0;
  std::vector<std::vector<double>> axes;
  std::vector<Quaternion> values;
};

using KernelSpec = std::variant<Sinc1D, QftSeparable2D, Tabulated>;

int kernel_dim(const KernelSpec& spec);
double kernel_tau(const KernelSpec& spec);
std::string kernel_name(const KernelSpec& spec);
/// Bandwidth of a built-in kernel; empty for tabulated kernels.
std::optional<double> kernel_sigma(const KernelSpec& spec);

/// Throws std::invalid_argument on non-positive parameters or an
/// inconsistent table.
void validate(const KernelSpec& spec);

/// True when w lies in D (with a relative slack of 1e-12).
bool in_domain(const KernelSpec& spec, const Point& w);

/// E(w, x). Throws std::domain_error when w is outside D, or when x is
/// outside the table of a tabulated kernel.
Quaternion eval_E(const KernelSpec& spec, const Point& w, const Point& x);

/// Closed-form S(x, y) for the built-in kernels. Tabulated kernels are
/// integrated with a 64-point (1D) or 32x32 (2D) Gauss-Legendre rule and the
/// real part is returned.
double eval_S(const KernelSpec& spec, const Point& x, const Point& y);

/// sin(t) / t, with a series branch near zero.
double sinc(double t);

/// sum_k c_k E(w_k, y) conj(E(w_k, x)), the discretized reproducing kernel.
Quaternion quadrature_S(const KernelSpec& spec, const QuadratureGrid& grid, const Point& x,
                        const Point& y);
/// sum_k c_k conj(E(w_k, x)) E(w_k, y), the right-hand side of condition 4.
Quaternion quadrature_S_reversed(const KernelSpec& spec, const QuadratureGrid& grid,
                                 const Point& x, const Point& y);

/// Spacing of the orthogonal sampling lattice (pi / sigma per axis) for the
/// built-in kernels; empty for tabulated kernels.
std::optional<double> lattice_spacing(const KernelSpec& spec);

/// Range of x coordinates on which E may be evaluated, per axis. Built-in
/// kernels accept all of R^d.
std::array<double, 2> x_range(const KernelSpec& spec, int axis);

struct AdmissibilityCheck {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Randomized verification of the four admissibility conditions:
///   1 symmetry      E(w, x) = E(x, w)
///   2 totality      no nonzero F in L2(D) annihilated by every E(., x)
///   3 real kernel   S(x, y) has no vector part
///   4 commutation   int E(w,y) conj E(w,x) = int conj E(w,x) E(w,y)
/// Condition 2 is probed on a finite family of sections E(., x_n): the
/// smallest eigenvalue of their Gram matrix in L2(D) must stay away from zero
/// relative to the largest. Built-in kernels use their sampling lattice;
/// tabulated kernels use up to five tabulated x nodes per axis.
struct AdmissibilityReport {
  std::array<AdmissibilityCheck, 4> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

AdmissibilityReport check_admissibility(const KernelSpec& spec, const QuadratureGrid& grid,
                                        std::size_t trials, std::uint64_t seed = 1);

/// Reads `w1[,w2],x1[,x2],w,x,y,z` rows into a tabulated kernel. The
/// dimension is inferred from the column count; a non-numeric first line is
/// treated as a header. Throws InputError naming the row and column.
Tabulated load_tabulated_csv(const std::string& path);

}  // namespace qsample
