#include "qsample/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "qsample/random.hpp"
#include "qsample/summation.hpp"

namespace qsample {

namespace {

constexpr std::size_t kSmoothOrder = 4;

// Legendre P_0 .. P_{n-1} at t.
std::array<double, kSmoothOrder> legendre_values(double t) {
  std::array<double, kSmoothOrder> p{};
  p[0] = 1.0;
  p[1] = t;
  for (std::size_t k = 2; k < kSmoothOrder; ++k)
    p[k] = ((2.0 * static_cast<double>(k) - 1.0) * t * p[k - 1] - (static_cast<double>(k) - 1.0) * p[k - 2]) /
           static_cast<double>(k);
  return p;
}

Quaternion sum(std::vector<Quaternion>& terms) { return pairwise_sum(std::span<const Quaternion>(terms)); }

}  // namespace

BandlimitedSignal make_signal(const KernelSpec& spec, const QuadratureGrid& grid, QVector F) {
  if (F.size() != grid.size()) throw std::invalid_argument("signal: coefficient count does not match the grid");
  if (grid.dim != kernel_dim(spec)) throw std::invalid_argument("signal: grid dimension does not match kernel");
  return {spec, grid, std::move(F)};
}

BandlimitedSignal synth(const KernelSpec& spec, const QuadratureGrid& grid, std::uint64_t seed, SignalShape shape) {
  std::mt19937_64 rng(seed);
  QVector F(grid.size());
  if (shape == SignalShape::white) {
    for (auto& q : F) q = random_quaternion(rng);
    return make_signal(spec, grid, std::move(F));
  }
  const int dim = grid.dim;
  const std::size_t terms = dim == 1 ? kSmoothOrder : kSmoothOrder * kSmoothOrder;
  std::vector<Quaternion> coeff(terms);
  for (auto& q : coeff) q = random_quaternion(rng);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& w = grid.nodes[k];
    const double t0 = w[0] / grid.tau;
    const auto p0 = legendre_values(t0);
    double taper = (1.0 - t0 * t0) * (1.0 - t0 * t0);
    Quaternion v;
    if (dim == 1) {
      for (std::size_t a = 0; a < kSmoothOrder; ++a) v += p0[a] * coeff[a];
    } else {
      const double t1 = w[1] / grid.tau;
      const auto p1 = legendre_values(t1);
      taper *= (1.0 - t1 * t1) * (1.0 - t1 * t1);
      for (std::size_t a = 0; a < kSmoothOrder; ++a)
        for (std::size_t b = 0; b < kSmoothOrder; ++b) v += (p0[a] * p1[b]) * coeff[a * kSmoothOrder + b];
    }
    F[k] = taper * v;
  }
  return make_signal(spec, grid, std::move(F));
}

Quaternion eval(const BandlimitedSignal& f, const Point& x) {
  std::vector<Quaternion> terms(f.grid.size());
  for (std::size_t k = 0; k < terms.size(); ++k)
    terms[k] = f.grid.weights[k] * f.F[k] * conj(eval_E(f.spec, f.grid.nodes[k], x));
  return sum(terms);
}

std::vector<LatticeIndex> lattice_indices(int dim, std::size_t n_max) {
  const int n = static_cast<int>(n_max);
  std::vector<LatticeIndex> out;
  if (dim == 1) {
    for (int a = -n; a <= n; ++a) out.push_back({a, 0});
  } else {
    for (int a = -n; a <= n; ++a)
      for (int b = -n; b <= n; ++b) out.push_back({a, b});
  }
  return out;
}

Point lattice_point(const KernelSpec& spec, const LatticeIndex& n) {
  const auto h = lattice_spacing(spec);
  if (!h) throw std::invalid_argument("sampling: kernel '" + kernel_name(spec) + "' has no known sampling lattice");
  Point p{*h * n[0], 0.0};
  if (kernel_dim(spec) == 2) p[1] = *h * n[1];
  return p;
}

SampledSignal sample_lattice(const BandlimitedSignal& f, std::size_t n_max) {
  SampledSignal s;
  s.dim = kernel_dim(f.spec);
  s.n_max = n_max;
  for (const auto& n : lattice_indices(s.dim, n_max)) {
    s.points.push_back(lattice_point(f.spec, n));
    s.values.push_back(eval(f, s.points.back()));
  }
  return s;
}

void validate(const SampledSignal& s) {
  if (s.points.size() != s.values.size()) throw std::invalid_argument("samples: point and value counts differ");
  std::set<Point> seen;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (!seen.insert(s.points[i]).second) {
      throw std::invalid_argument("samples: point " + std::to_string(i) + " repeats an earlier point");
    }
    const auto& q = s.values[i];
    if (!std::isfinite(q.w) || !std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z)) {
      throw std::invalid_argument("samples: value " + std::to_string(i) + " is not finite");
    }
  }
}

double lattice_weight(const KernelSpec& spec) {
  lattice_point(spec, {0, 0});  // throws without a lattice
  const Point o{0.0, 0.0};
  return 1.0 / eval_S(spec, o, o);
}

Quaternion reconstruct_wsk(const SampledSignal& s, const KernelSpec& spec, const Point& x) {
  const double wt = lattice_weight(spec);
  std::vector<Quaternion> terms(s.points.size());
  for (std::size_t n = 0; n < terms.size(); ++n) terms[n] = s.values[n] * (wt * eval_S(spec, x, s.points[n]));
  return sum(terms);
}

std::vector<Quaternion> reconstruct_psqws(const SampledSignal& s, const PsqwsBasis& basis,
                                          const std::vector<Point>& xs, std::size_t modes) {
  if (modes > basis.count()) throw std::out_of_range("reconstruct_psqws: more modes than the basis holds");
  const double wt = lattice_weight(basis.spec);
  std::vector<Quaternion> out(xs.size());
  if (modes == 0) return out;

  // c_n = sum_m f(x_m) conj(phi_n(x_m))
  std::vector<std::vector<Quaternion>> phi_at(s.points.size());
  for (std::size_t m = 0; m < s.points.size(); ++m) phi_at[m] = extend_all(basis, s.points[m], modes);
  std::vector<Quaternion> c(modes), terms(s.points.size());
  for (std::size_t n = 0; n < modes; ++n) {
    for (std::size_t m = 0; m < s.points.size(); ++m) terms[m] = s.values[m] * conj(phi_at[m][n]);
    c[n] = wt * sum(terms);
  }
  std::vector<Quaternion> series(modes);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto phi = extend_all(basis, xs[i], modes);
    for (std::size_t n = 0; n < modes; ++n) series[n] = c[n] * phi[n];
    out[i] = sum(series);
  }
  return out;
}

Quaternion reconstruct_psqws(const SampledSignal& s, const PsqwsBasis& basis, const Point& x, std::size_t modes) {
  return reconstruct_psqws(s, basis, std::vector<Point>{x}, modes).front();
}

Quaternion discrete_orthogonality(const PsqwsBasis& basis, const LatticeIndex& l, const LatticeIndex& m,
                                  std::size_t modes) {
  if (modes > basis.count()) throw std::out_of_range("discrete_orthogonality: more modes than the basis holds");
  if (modes == 0) return {};
  const auto pl = extend_all(basis, lattice_point(basis.spec, l), modes);
  const auto pm = extend_all(basis, lattice_point(basis.spec, m), modes);
  std::vector<Quaternion> terms(modes);
  for (std::size_t n = 0; n < modes; ++n) terms[n] = conj(pl[n]) * pm[n];
  return lattice_weight(basis.spec) * sum(terms);
}

std::vector<Quaternion> coefficients(const BandlimitedSignal& f, const PsqwsBasis& basis) {
  if (basis.grid.size() != f.grid.size()) throw std::invalid_argument("coefficients: signal and basis grids differ");
  std::vector<Quaternion> a(basis.count()), terms(f.grid.size());
  for (std::size_t n = 0; n < basis.count(); ++n) {
    for (std::size_t k = 0; k < terms.size(); ++k) terms[k] = f.grid.weights[k] * f.F[k] * conj(basis.Phi[n][k]);
    a[n] = sum(terms);
  }
  return a;
}

Quaternion h_inner(const BandlimitedSignal& f, const BandlimitedSignal& g) {
  if (f.grid.size() != g.grid.size()) throw std::invalid_argument("h_inner: signals live on different grids");
  std::vector<Quaternion> terms(f.grid.size());
  for (std::size_t k = 0; k < terms.size(); ++k) terms[k] = f.grid.weights[k] * f.F[k] * conj(g.F[k]);
  return sum(terms);
}

Quaternion h_inner_coefficients(const BandlimitedSignal& f, const BandlimitedSignal& g, const PsqwsBasis& basis) {
  const auto a = coefficients(f, basis);
  const auto b = coefficients(g, basis);
  std::vector<Quaternion> terms(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) terms[n] = a[n] * conj(b[n]);
  return sum(terms);
}

Quaternion lattice_parseval(const SampledSignal& f, const SampledSignal& g, const KernelSpec& spec) {
  if (f.points != g.points) throw std::invalid_argument("lattice_parseval: sample sets differ");
  std::vector<Quaternion> terms(f.values.size());
  for (std::size_t n = 0; n < terms.size(); ++n) terms[n] = f.values[n] * conj(g.values[n]);
  return lattice_weight(spec) * sum(terms);
}

Concentration concentration_ratio(const BandlimitedSignal& f, const PsqwsBasis& basis) {
  Concentration c;
  c.h_norm2 = h_inner(f, f).w;
  if (!(c.h_norm2 > 0.0)) throw std::invalid_argument("concentration_ratio: signal has zero norm");

  const auto a = coefficients(f, basis);
  std::vector<double> num(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) num[n] = norm2(a[n]) * basis.mu[n];
  c.coefficient = pairwise_sum(std::span<const double>(num)) / c.h_norm2;

  std::vector<double> energy(f.grid.size());
  for (std::size_t k = 0; k < energy.size(); ++k) energy[k] = f.grid.weights[k] * norm2(eval(f, f.grid.nodes[k]));
  c.quadrature = pairwise_sum(std::span<const double>(energy)) / c.h_norm2;
  return c;
}

Concentration concentration_ratio(const BandlimitedSignal& f, const PsqwsBasis& basis, const NystromOperator& op) {
  if (op.grid.size() != f.grid.size()) throw std::invalid_argument("concentration_ratio: signal and operator grids differ");
  Concentration c;
  c.h_norm2 = h_inner(f, f).w;
  if (!(c.h_norm2 > 0.0)) throw std::invalid_argument("concentration_ratio: signal has zero norm");

  const auto a = coefficients(f, basis);
  std::vector<double> num(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) num[n] = norm2(a[n]) * basis.mu[n];
  c.coefficient = pairwise_sum(std::span<const double>(num)) / c.h_norm2;

  QVector u(f.grid.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::sqrt(f.grid.weights[k]) * f.F[k];
  const auto v = apply(op.T, u);
  std::vector<double> energy(v.size());
  for (std::size_t k = 0; k < energy.size(); ++k) energy[k] = norm2(v[k]);
  c.quadrature = pairwise_sum(std::span<const double>(energy)) / c.h_norm2;
  return c;
}

std::pair<double, double> trace_identity(const PsqwsBasis& basis) {
  std::vector<double> diag(basis.grid.size());
  for (std::size_t k = 0; k < diag.size(); ++k) {
    const auto& w = basis.grid.nodes[k];
    diag[k] = basis.grid.weights[k] *
              (std::holds_alternative<Tabulated>(basis.spec) ? quadrature_S(basis.spec, basis.grid, w, w).w
                                                              : eval_S(basis.spec, w, w));
  }
  return {pairwise_sum(std::span<const double>(diag)), pairwise_sum(std::span<const double>(basis.all_mu))};
}

}  // namespace qsample
