#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "qsample/kernels.hpp"
#include "qsample/nystrom.hpp"
#include "qsample/qlinalg.hpp"

namespace qsample {

/// f = T F for grid coefficients F(w_k):
///   f(x) = sum_k c_k F(w_k) conj(E(w_k, x)).
struct BandlimitedSignal {
  KernelSpec spec;
  QuadratureGrid grid;
  QVector F;
};

enum class SignalShape {
  /// Independent components uniform in [-1, 1] at every node.
  white,
  /// A random low-order Legendre combination (coefficients uniform in
  /// [-1, 1]) times (1 - (w/tau)^2)^2 per axis. Its transform decays like
  /// |x|^-3, so lattice series converge at a useful rate.
  smooth,
};

BandlimitedSignal synth(const KernelSpec& spec, const QuadratureGrid& grid, std::uint64_t seed,
                        SignalShape shape = SignalShape::white);

/// Wraps existing coefficients; throws std::invalid_argument on a size mismatch.
BandlimitedSignal make_signal(const KernelSpec& spec, const QuadratureGrid& grid, QVector F);

Quaternion eval(const BandlimitedSignal& f, const Point& x);

using LatticeIndex = std::array<int, 2>;

/// Samples at lattice points x_n = (pi / sigma) n, |n_axis| <= n_max.
struct SampledSignal {
  int dim = 1;
  std::size_t n_max = 0;
  std::vector<Point> points;
  std::vector<Quaternion> values;
};

/// Lattice indices with |n_axis| <= n_max, last axis fastest.
std::vector<LatticeIndex> lattice_indices(int dim, std::size_t n_max);
/// Throws std::invalid_argument for kernels without a sampling lattice.
Point lattice_point(const KernelSpec& spec, const LatticeIndex& n);

SampledSignal sample_lattice(const BandlimitedSignal& f, std::size_t n_max);

/// Throws std::invalid_argument when points repeat, values are not finite,
/// or the two lists differ in length.
void validate(const SampledSignal& s);

/// Weight that makes the sections E(., x_n) orthonormal: 1 / S(x_n, x_n),
/// i.e. pi / sigma for Sinc1D and 1 for QftSeparable2D.
double lattice_weight(const KernelSpec& spec);

/// sum_n f(x_n) S(x, x_n), scaled by lattice_weight.
Quaternion reconstruct_wsk(const SampledSignal& s, const KernelSpec& spec, const Point& x);

/// PSQWS series with the first `modes` modes:
///   sum_n (sum_m f(x_m) conj(phi_n(x_m))) phi_n(x)
/// with the inner sum scaled by lattice_weight.
Quaternion reconstruct_psqws(const SampledSignal& s, const PsqwsBasis& basis, const Point& x, std::size_t modes);

/// As above for many points, sharing the inner sums.
std::vector<Quaternion> reconstruct_psqws(const SampledSignal& s, const PsqwsBasis& basis,
                                          const std::vector<Point>& xs, std::size_t modes);

/// sum_{n < modes} conj(phi_n(x_l)) phi_n(x_m), scaled by lattice_weight so
/// that the limit is the Kronecker delta.
Quaternion discrete_orthogonality(const PsqwsBasis& basis, const LatticeIndex& l, const LatticeIndex& m,
                                  std::size_t modes);

/// a_n = sum_k c_k F(w_k) conj(Phi_n(w_k)) for the retained modes.
std::vector<Quaternion> coefficients(const BandlimitedSignal& f, const PsqwsBasis& basis);

/// (F, G) in L2(D), which is the H-inner product (f, g)_H of the range.
Quaternion h_inner(const BandlimitedSignal& f, const BandlimitedSignal& g);
/// sum_n a_n conj(b_n) over the retained modes.
Quaternion h_inner_coefficients(const BandlimitedSignal& f, const BandlimitedSignal& g, const PsqwsBasis& basis);
/// lattice_weight * sum_n f(x_n) conj(g(x_n)); the two sample sets must share points.
Quaternion lattice_parseval(const SampledSignal& f, const SampledSignal& g, const KernelSpec& spec);

struct Concentration {
  /// sum |a_n|^2 mu_n / ||F||^2
  double coefficient = 0.0;
  /// sum_k c_k |f(w_k)|^2 / ||F||^2
  double quadrature = 0.0;
  /// ||f||_H^2 = ||F||^2
  double h_norm2 = 0.0;
};

/// Energy concentration in D of f, computed two ways. The coefficient form
/// divides by ||F||^2, so modes dropped by the retention floor contribute to
/// the denominator but not to the numerator (an error below floor * mu_1).
/// Throws std::invalid_argument for a zero signal.
Concentration concentration_ratio(const BandlimitedSignal& f, const PsqwsBasis& basis);
/// Same, with the quadrature form read off the assembled transform: the grid
/// values sqrt(c_k) f(w_k) are the row sqrt(c) F times T. Much cheaper in 2D.
Concentration concentration_ratio(const BandlimitedSignal& f, const PsqwsBasis& basis, const NystromOperator& op);

/// (sum_k c_k S(w_k, w_k), sum of all discrete mu).
std::pair<double, double> trace_identity(const PsqwsBasis& basis);

}  // namespace qsample
