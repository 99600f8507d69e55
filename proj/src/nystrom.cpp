#include "qsample/nystrom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qsample/errors.hpp"
#include "qsample/random.hpp"
#include "qsample/summation.hpp"

namespace qsample {

namespace {

bool is_tabulated(const KernelSpec& spec) { return std::holds_alternative<Tabulated>(spec); }

// S(x, y) as used by the discretization: closed form for built-ins, the
// grid quadrature for tabulated kernels.
Quaternion kernel_S(const KernelSpec& spec, const QuadratureGrid& grid, const Point& x, const Point& y) {
  if (is_tabulated(spec)) return quadrature_S(spec, grid, x, y);
  return Quaternion(eval_S(spec, x, y));
}

std::size_t dominant_entry(const QVector& v) {
  double top = 0.0;
  for (const auto& q : v) top = std::max(top, norm(q));
  for (std::size_t k = 0; k < v.size(); ++k)
    if (norm(v[k]) >= (1.0 - 1e-6) * top) return k;
  return 0;
}

// Unit c with c lambda c^-1 == lambda that turns the dominant entry of phi
// real and positive when lambda is real, and otherwise into the plane
// spanned by 1 and j (entries a + b j with a, b in C_i; c in C_i makes the
// larger of a, b real positive).
Quaternion phase_factor(const QVector& phi, const Quaternion& lambda) {
  const Quaternion v = phi[dominant_entry(phi)];
  const double nv = norm(v);
  if (nv == 0.0) return Quaternion(1.0);
  const Quaternion u = v / nv;
  const double vec = norm(vector_part(lambda));
  if (vec <= 1e-12 * std::max(norm(lambda), 1e-300)) return conj(u);
  const double na = std::hypot(u.w, u.x);
  const double nb = std::hypot(u.y, u.z);
  if (na >= nb) return Quaternion(u.w, -u.x, 0.0, 0.0) / na;
  return Quaternion(u.y, -u.z, 0.0, 0.0) / nb;
}

struct RealMode {
  std::vector<double> psi;  // real grid values
  Quaternion nu;            // eigenvalue for psi, in C_i
  Quaternion u;             // Phi = u psi
};

// Writes a 1D mode of a complex (C_i-valued) kernel as u psi with psi real.
RealMode realify(const PsqwsBasis& b, std::size_t n) {
  const auto& phi = b.Phi[n];
  const Quaternion v = phi[dominant_entry(phi)];
  RealMode r;
  r.u = v / norm(v);
  const Quaternion ui = conj(r.u);
  double top = 0.0, stray = 0.0;
  r.psi.resize(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const Quaternion p = ui * phi[k];
    r.psi[k] = p.w;
    top = std::max(top, std::fabs(p.w));
    stray = std::max(stray, norm(vector_part(p)));
  }
  if (stray > 1e-8 * top) {
    throw std::invalid_argument("tensor_eigensystem: 1D eigenfunction " + std::to_string(n) +
                                " is not a quaternion multiple of a real function");
  }
  r.nu = ui * b.lambda[n] * r.u;
  return r;
}

// Quaternion-weighted sums are small (one term per node); pairwise summation
// keeps their rounding independent of how callers batch evaluations.
Quaternion weighted_sum(std::vector<Quaternion>& terms) {
  return pairwise_sum(std::span<const Quaternion>(terms));
}

}  // namespace

NystromOperator build(const KernelSpec& spec, const QuadratureGrid& grid, const BuildOptions& opts) {
  validate(spec);
  if (grid.dim != kernel_dim(spec)) throw std::invalid_argument("build: grid dimension does not match kernel");
  if (grid.size() < 2) throw std::invalid_argument("build: grid needs at least 2 nodes");
  if (std::fabs(grid.tau - kernel_tau(spec)) > 1e-12 * kernel_tau(spec)) {
    throw std::invalid_argument("build: grid domain does not match kernel domain");
  }
  if (opts.check_admissibility) {
    const auto report = check_admissibility(spec, grid, opts.admissibility_trials);
    if (!report.passed()) {
      std::string failed;
      for (const auto& c : report.checks) {
        if (c.passed) continue;
        if (!failed.empty()) failed += ", ";
        failed += c.name + " (worst " + std::to_string(c.worst) + ")";
      }
      throw AdmissibilityError("build: kernel is not admissible: " + failed);
    }
  }

  const std::size_t n = grid.size();
  std::vector<double> root(n);
  for (std::size_t k = 0; k < n; ++k) root[k] = std::sqrt(grid.weights[k]);

  NystromOperator op{spec, grid, QMatrix(n, n), QMatrix()};
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      op.T(k, j) = root[k] * conj(eval_E(spec, grid.nodes[k], grid.nodes[j])) * root[j];

  if (is_tabulated(spec)) {
    op.K = product(adjoint(op.T), op.T);
  } else {
    op.K = QMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        op.K(k, j) = Quaternion(root[k] * eval_S(spec, grid.nodes[j], grid.nodes[k]) * root[j]);
  }
  return op;
}

double normality_defect(const NystromOperator& op) {
  const QMatrix adj = adjoint(op.T);
  const double t = frobenius_norm(op.T);
  return frobenius_norm(product(op.T, adj) - product(adj, op.T)) / (t * t);
}

double kernel_defect(const NystromOperator& op) {
  const double t = frobenius_norm(op.T);
  return frobenius_norm(op.K - product(adjoint(op.T), op.T)) / (t * t);
}

double kernel_trace(const NystromOperator& op) {
  std::vector<double> terms(op.grid.size());
  for (std::size_t k = 0; k < op.grid.size(); ++k) {
    const auto& w = op.grid.nodes[k];
    terms[k] = op.grid.weights[k] * kernel_S(op.spec, op.grid, w, w).w;
  }
  return pairwise_sum(std::span<const double>(terms));
}

PsqwsBasis eigensystem(const NystromOperator& op, double retention_floor, const SpectralOptions& opts) {
  if (!(retention_floor >= 0.0) || retention_floor > 1.0) {
    throw std::invalid_argument("eigensystem: retention floor must lie in [0, 1]");
  }
  const auto kd = eig_selfadjoint(op.K, opts);
  PsqwsBasis b;
  b.spec = op.spec;
  b.grid = op.grid;
  b.retention_floor = retention_floor;
  b.all_mu.reserve(kd.size());
  for (const auto& e : kd.eigenvalues) b.all_mu.push_back(e.w);
  if (kd.size() == 0 || !(b.all_mu.front() > 0.0)) throw SpectralError("eigensystem: operator has no positive spectrum");

  // Keep every mode above the floor, plus any mode tied with the last one kept.
  const double mu1 = b.all_mu.front();
  std::size_t count = 0;
  while (count < kd.size() && (retention_floor == 0.0 || b.all_mu[count] >= retention_floor * mu1)) ++count;
  while (count < kd.size() && b.all_mu[count - 1] - b.all_mu[count] <= opts.cluster_tol * b.all_mu[count - 1]) ++count;

  const auto td = eig_normal_restricted(op.T, kd, count, opts);
  const QMatrix tadj = adjoint(op.T);

  struct Mode {
    double mu;
    Quaternion lambda;
    QVector xi;
    double residual;
  };
  std::vector<Mode> modes;
  modes.reserve(td.size());
  for (std::size_t m = 0; m < td.size(); ++m) {
    const QVector& xi = td.eigenvectors[m];
    const Quaternion c = phase_factor(xi, td.eigenvalues[m]);
    QVector turned = scale(c, xi);
    // Rayleigh quotient of K = T T* at xi, taken in factored form so that small
    // modes keep their relative accuracy.
    const double rq = std::pow(norm(apply(tadj, turned)), 2);
    modes.push_back({rq, c * td.eigenvalues[m] * conj(c), std::move(turned), td.residuals[m]});
  }
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& c) { return a.mu > c.mu; });

  for (auto& m : modes) {
    QVector phi(m.xi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = m.xi[k] / std::sqrt(op.grid.weights[k]);
    b.Phi.push_back(std::move(phi));
    b.lambda.push_back(m.lambda);
    b.mu.push_back(m.mu);
    b.residuals.push_back(m.residual);
  }
  return b;
}

std::vector<Quaternion> extend_all(const PsqwsBasis& basis, const Point& x, std::size_t modes) {
  if (modes > basis.count()) throw std::out_of_range("extend: mode index out of range");
  const std::size_t n = basis.grid.size();
  std::vector<Quaternion> ce(n);
  for (std::size_t k = 0; k < n; ++k) ce[k] = basis.grid.weights[k] * conj(eval_E(basis.spec, basis.grid.nodes[k], x));
  std::vector<Quaternion> out(modes), terms(n);
  for (std::size_t m = 0; m < modes; ++m) {
    for (std::size_t k = 0; k < n; ++k) terms[k] = basis.phi_at_node(m, k) * ce[k];
    out[m] = inverse(basis.lambda[m]) * weighted_sum(terms);
  }
  return out;
}

Quaternion extend(const PsqwsBasis& basis, std::size_t n, const Point& x) {
  if (n >= basis.count()) throw std::out_of_range("extend: mode index out of range");
  const std::size_t nodes = basis.grid.size();
  std::vector<Quaternion> terms(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    terms[k] = basis.grid.weights[k] * basis.phi_at_node(n, k) * conj(eval_E(basis.spec, basis.grid.nodes[k], x));
  }
  return inverse(basis.lambda[n]) * weighted_sum(terms);
}

Quaternion kernel_equation_residual(const PsqwsBasis& basis, std::size_t n, const Point& x) {
  const std::size_t nodes = basis.grid.size();
  std::vector<Quaternion> terms(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const auto& y = basis.grid.nodes[k];
    terms[k] = basis.grid.weights[k] * basis.phi_at_node(n, k) * kernel_S(basis.spec, basis.grid, x, y);
  }
  return weighted_sum(terms) - basis.mu[n] * extend(basis, n, x);
}

double tensor_constant(double sigma) {
  const double r = std::numbers::pi / sigma;
  return r * r;
}

PsqwsBasis tensor_eigensystem(const KernelSpec& spec2d, const PsqwsBasis& basis1d, double retention_floor) {
  const auto* k2 = std::get_if<QftSeparable2D>(&spec2d);
  const auto* k1 = std::get_if<Sinc1D>(&basis1d.spec);
  if (!k2 || !k1) throw std::invalid_argument("tensor_eigensystem: needs a qft2d kernel and a sinc1d basis");
  if (std::fabs(k1->sigma - k2->sigma) > 1e-12 * k2->sigma || std::fabs(k1->tau - k2->tau) > 1e-12 * k2->tau) {
    throw std::invalid_argument("tensor_eigensystem: sigma and tau of the two kernels differ");
  }
  if (basis1d.count() == 0) throw std::invalid_argument("tensor_eigensystem: empty 1D basis");

  const std::size_t m1 = basis1d.count();
  std::vector<RealMode> real;
  real.reserve(m1);
  for (std::size_t n = 0; n < m1; ++n) real.push_back(realify(basis1d, n));

  const auto& g1 = basis1d.grid;
  const std::size_t n1 = g1.size();
  PsqwsBasis b;
  b.spec = spec2d;
  b.retention_floor = retention_floor;
  b.grid.dim = 2;
  b.grid.tau = g1.tau;
  b.grid.n_per_axis = n1;
  for (std::size_t a = 0; a < n1; ++a) {
    for (std::size_t c = 0; c < n1; ++c) {
      b.grid.nodes.push_back({g1.nodes[a][0], g1.nodes[c][0]});
      b.grid.weights.push_back(g1.weights[a] * g1.weights[c]);
    }
  }

  const double scale_mu = tensor_constant(k2->sigma);
  const double scale_lambda = std::numbers::pi / k2->sigma;
  for (double p : basis1d.all_mu)
    for (double q : basis1d.all_mu) b.all_mu.push_back(scale_mu * p * q);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t m = 0; m < m1; ++m)
    for (std::size_t n = 0; n < m1; ++n) pairs.emplace_back(m, n);
  const auto pair_mu = [&](const std::pair<std::size_t, std::size_t>& p) {
    return scale_mu * basis1d.mu[p.first] * basis1d.mu[p.second];
  };
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& c) { return pair_mu(a) > pair_mu(c); });
  const double top = pair_mu(pairs.front());

  for (const auto& p : pairs) {
    const double mu = pair_mu(p);
    if (mu < retention_floor * top) break;
    const RealMode& rm = real[p.first];
    const RealMode& rn = real[p.second];
    const Quaternion nu_j(rn.nu.w, 0.0, rn.nu.x, 0.0);
    const Quaternion lambda = scale_lambda * nu_j * rm.nu;
    const Quaternion u = canonical_similarity(lambda);
    const Quaternion ui = conj(u);
    const auto c = canonical_complex_representative(lambda);

    QVector phi(n1 * n1);
    for (std::size_t a = 0; a < n1; ++a)
      for (std::size_t d = 0; d < n1; ++d) phi[a * n1 + d] = ui * (rm.psi[a] * rn.psi[d]);
    b.Phi.push_back(std::move(phi));
    b.lambda.push_back(Quaternion(c.real(), c.imag(), 0.0, 0.0));
    b.mu.push_back(mu);
    b.tensor_index.push_back(p);
  }
  return b;
}

TensorReport cross_validate_tensor(const KernelSpec& spec2d, const PsqwsBasis& basis1d, std::size_t direct_nodes,
                                   std::size_t top, std::uint64_t seed) {
  TensorReport r;
  r.direct_nodes = direct_nodes;
  const double tau = kernel_tau(spec2d);
  const auto grid = gauss_legendre_grid(2, tau, direct_nodes);
  const auto op = build(spec2d, grid);
  const auto direct = eigensystem(op);
  const auto tensor = tensor_eigensystem(spec2d, basis1d);

  r.compared = std::min({top, direct.count(), tensor.count()});
  r.direct_mu.assign(direct.mu.begin(), direct.mu.begin() + static_cast<std::ptrdiff_t>(r.compared));
  r.tensor_mu.assign(tensor.mu.begin(), tensor.mu.begin() + static_cast<std::ptrdiff_t>(r.compared));
  for (std::size_t n = 0; n < r.compared; ++n)
    r.worst_mu_rel = std::max(r.worst_mu_rel, std::fabs(r.direct_mu[n] - r.tensor_mu[n]) / r.tensor_mu[n]);
  r.fitted_constant = direct.mu.front() / (basis1d.mu.front() * basis1d.mu.front());
  r.analytic_constant = tensor_constant(*kernel_sigma(spec2d));

  const double tie = 1e-6 * direct.mu.front();
  for (std::size_t n = 0; n + 1 < r.compared; ++n) {
    if (r.direct_mu[n] - r.direct_mu[n + 1] <= tie) r.direct_pairs.emplace_back(n, n + 1);
    if (r.tensor_mu[n] - r.tensor_mu[n + 1] <= 1e-6 * r.tensor_mu.front()) ++r.predicted_pairs;
  }

  // Tensor Phi_00 sampled on the direct grid via the extended 1D mode.
  const RealMode r0 = realify(basis1d, 0);
  std::vector<double> psi(direct_nodes);
  {
    const auto g1 = gauss_legendre_grid(1, tau, direct_nodes);
    const Quaternion back = conj(r0.u) * inverse(basis1d.lambda[0]);
    for (std::size_t a = 0; a < direct_nodes; ++a) psi[a] = (back * extend(basis1d, 0, g1.nodes[a])).w;
  }
  Quaternion overlap;
  double nd = 0.0, nt = 0.0;
  for (std::size_t a = 0; a < direct_nodes; ++a) {
    for (std::size_t c = 0; c < direct_nodes; ++c) {
      const std::size_t k = a * direct_nodes + c;
      const double t = psi[a] * psi[c];
      overlap += grid.weights[k] * t * direct.Phi[0][k];
      nd += grid.weights[k] * norm2(direct.Phi[0][k]);
      nt += grid.weights[k] * t * t;
    }
  }
  r.phi00_correlation = norm(overlap) / std::sqrt(nd * nt);

  std::mt19937_64 rng(seed);
  for (std::size_t n = 0; n < r.compared; ++n) {
    double peak = 0.0;
    for (std::size_t k = 0; k < tensor.grid.size(); ++k) peak = std::max(peak, norm(tensor.phi_at_node(n, k)));
    for (int t = 0; t < 20; ++t) {
      const Point x{uniform(rng, -3.0 * tau, 3.0 * tau), uniform(rng, -3.0 * tau, 3.0 * tau)};
      r.worst_tensor_residual = std::max(r.worst_tensor_residual, norm(kernel_equation_residual(tensor, n, x)) / peak);
    }
  }
  return r;
}

ExpansionReport expansion_residuals(const PsqwsBasis& basis, const std::vector<std::pair<Point, Point>>& points) {
  ExpansionReport rep;
  const std::size_t count = basis.count();
  std::vector<std::size_t> levels{0};
  for (std::size_t l = 1; l < count; l *= 2) levels.push_back(l);
  if (count > 0) levels.push_back(count);
  for (std::size_t l : levels) rep.levels.push_back({l, 0.0, 0.0, 0.0, 0.0});
  rep.e_monotone = true;
  rep.s_diagonal_monotone = true;

  const std::size_t nodes = basis.grid.size();
  std::vector<Quaternion> lambda_inv(count);
  for (std::size_t n = 0; n < count; ++n) lambda_inv[n] = inverse(basis.lambda[n]);

  for (const auto& [a, b] : points) {
    const auto phi_a = extend_all(basis, a, count);
    const auto phi_b = extend_all(basis, b, count);
    std::vector<Quaternion> resid(nodes);
    for (std::size_t k = 0; k < nodes; ++k) resid[k] = eval_E(basis.spec, basis.grid.nodes[k], b);
    Quaternion point_resid = eval_E(basis.spec, a, b);
    Quaternion s_resid = kernel_S(basis.spec, basis.grid, a, b);
    double diag_a = kernel_S(basis.spec, basis.grid, a, a).w;
    double diag_b = kernel_S(basis.spec, basis.grid, b, b).w;

    std::size_t done = 0;
    double prev_e = 0.0, prev_d = 0.0;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      for (; done < levels[li]; ++done) {
        const Quaternion coeff = conj(phi_b[done]) * lambda_inv[done];
        for (std::size_t k = 0; k < nodes; ++k) resid[k] -= coeff * basis.phi_at_node(done, k);
        point_resid -= coeff * phi_a[done];
        s_resid -= conj(phi_b[done]) * phi_a[done];
        diag_a -= norm2(phi_a[done]);
        diag_b -= norm2(phi_b[done]);
      }
      std::vector<double> sq(nodes);
      for (std::size_t k = 0; k < nodes; ++k) sq[k] = basis.grid.weights[k] * norm2(resid[k]);
      const double e = std::sqrt(pairwise_sum(std::span<const double>(sq)));
      const double d = std::max(diag_a, diag_b);
      auto& lv = rep.levels[li];
      lv.e_residual = std::max(lv.e_residual, e);
      lv.e_pointwise = std::max(lv.e_pointwise, norm(point_resid));
      lv.s_residual = std::max(lv.s_residual, norm(s_resid));
      lv.s_diagonal = std::max(lv.s_diagonal, d);
      if (li > 0) {
        if (e > prev_e * (1.0 + 1e-12) + 1e-14) rep.e_monotone = false;
        if (d > prev_d + 1e-14) rep.s_diagonal_monotone = false;
      }
      prev_e = e;
      prev_d = d;
    }
  }
  return rep;
}

}  // namespace qsample
