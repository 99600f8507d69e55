#include "qsample/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qsample/nystrom.hpp"
#include "qsample/qlinalg.hpp"
#include "qsample/random.hpp"
#include "qsample/sampling.hpp"

namespace qsample {

const std::vector<ToleranceInfo>& default_tolerances() {
  static const std::vector<ToleranceInfo> table{
      {"algebra.norm_multiplicative", 1e-11, "max | |pq| - |p||q| |"},
      {"algebra.associativity", 1e-11, "max |(pq)r - p(qr)|"},
      {"algebra.conj_antihomomorphism", 1e-11, "max |conj(pq) - conj(q)conj(p)|"},
      {"algebra.inverse", 1e-11, "max |p p^-1 - 1| + |p^-1 p - 1|"},
      {"algebra.embed_homomorphism", 1e-10, "||embed(PQ) - embed(P)embed(Q)|| / (||P|| ||Q||)"},
      {"spectral.planted_modulus", 1e-8, "sorted |lambda| vs planted"},
      {"spectral.orthonormality", 1e-8, "max |(xi_a, xi_b) - delta_ab|"},
      {"spectral.normal_residual", 1e-8, "max ||M xi - lambda xi|| / ||M||"},
      {"eigensystem.trace_identity", 1e-10, "|sum mu - trace| / trace"},
      {"eigensystem.normality", 1e-9, "||TT* - T*T|| / ||T||^2"},
      {"eigensystem.kernel_defect", 1e-9, "||K - TT*|| / ||T||^2"},
      {"eigensystem.left_linearity", 1e-12, "||T(qu) - qT(u)|| / (|q| ||u|| ||T||)"},
      {"eigensystem.lambda_mu", 1e-8, "max | |lambda|^2 - mu | / mu over retained modes"},
      {"eigensystem.orthonormality", 1e-8, "max weighted Gram defect of Phi"},
      {"eigensystem.node_extension", 1e-8, "max |extend(w_k) - lambda Phi(w_k)|"},
      {"eigensystem.kernel_equation", 1e-7, "max |int phi S(x,.) - mu phi(x)|, top 10 modes, 20 random x"},
      {"eigensystem.dual_orthogonality", 1e-7, "max |int_D phi_m conj(phi_n) - mu_n delta| on a finer rule"},
      {"eigensystem.dual_orthogonality_table", 1e-3,
       "same, for tabulated kernels: interpolation kinks in E limit Gauss quadrature to about 1e-4"},
      {"tensor.mu_match", 1e-4, "top-10 direct vs tensor mu, relative"},
      {"tensor.constant", 1e-8, "|fitted / analytic - 1|"},
      {"tensor.degenerate_pairs", 0.0, "|direct pairs - predicted pairs|"},
      {"tensor.phi00_correlation", 1e-4, "1 - |(tensor Phi_00, direct Phi_1)|"},
      {"tensor.residual", 1e-7, "kernel equation of tensor modes, relative to peak"},
      {"expansion.e_monotone", 0.0, "E-series L2 residual increases under mode doubling"},
      {"expansion.s_diagonal_monotone", 0.0, "S(x,x) series residual increases under mode doubling"},
      {"expansion.s_diagonal", 0.02, "S(x,x) - sum |phi_n(x)|^2 at full retention, relative to S(x,x)"},
      {"sampling.wsk_lattice", 1e-12, "max |WSK(x_n) - f(x_n)|"},
      {"sampling.wsk_interior", 1e-2, "relative WSK error at N_max = 32"},
      {"sampling.wsk_monotone", 0.0, "WSK error fails to drop over N_max 8, 16, 32"},
      {"sampling.psqws_agreement", 1e-4, "relative |PSQWS - WSK| at full retention, N_max = 16"},
      {"sampling.psqws_monotone", 0.0, "PSQWS-WSK gap grows by 1e-8 or more under mode doubling"},
      {"sampling.discrete_orthogonality", 0.05, "max |sum conj(phi(x_l)) phi(x_m) - delta|, |n| <= 2"},
      {"sampling.discrete_orthogonality_monotone", 0.0, "worst defect fails to drop under mode doubling"},
      {"sampling.isometry", 1e-10, "|(f,g)_H - sum a_n conj(b_n)| with the complete basis"},
      {"sampling.plancherel", 1e-3, "lattice Parseval error at N_max = 16, relative to ||f||^2"},
      {"sampling.plancherel_monotone", 0.0, "lattice Parseval error fails to drop over N_max 4, 8, 16"},
      {"concentration.extremizer", 1e-8, "|beta(Phi_1) / mu_1 - 1|, both forms"},
      {"concentration.second_mode", 1e-8, "|beta(Phi_2) / mu_2 - 1|, both forms"},
      {"concentration.bound", 1e-8, "max beta_f / mu_1 - 1 over random signals"},
      {"concentration.forms_agree", 1e-8, "max |coefficient - quadrature| / quadrature"},
      {"concentration.projection", 0.0, "signals whose Phi_1 projection concentrates less"},
  };
  return table;
}

namespace {

constexpr double kPi = std::numbers::pi;

class Recorder {
 public:
  Recorder(const VerifyConfig& cfg, VerifyReport& rep) : cfg_(cfg), rep_(rep) {}

  void suite(std::string name) { suite_ = std::move(name); }

  void check(const std::string& name, double measured, std::string detail = {}) {
    const double tol = tolerance(name);
    rep_.invariants.push_back(
        {suite_, name, measured, tol, std::isfinite(measured) && measured <= tol, std::move(detail)});
  }
  void count(const std::string& name, std::size_t violations, std::string detail = {}) {
    check(name, static_cast<double>(violations), std::move(detail));
  }
  void raw(Invariant inv) {
    inv.suite = suite_;
    rep_.invariants.push_back(std::move(inv));
  }

  double tolerance(const std::string& name) const {
    if (const auto it = cfg_.tolerance_overrides.find(name); it != cfg_.tolerance_overrides.end()) return it->second;
    for (const auto& t : default_tolerances())
      if (t.name == name) return t.value;
    throw std::logic_error("verify: no tolerance registered for " + name);
  }

 private:
  const VerifyConfig& cfg_;
  VerifyReport& rep_;
  std::string suite_;
};

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(3);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

// Steps that fail to decrease by more than `slack`.
std::size_t rises(const std::vector<double>& v, double slack = 0.0) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1]) && v[i] - v[i - 1] >= slack) ++n;
  return n;
}

// 1, 2, 4, ... below count, then count.
std::vector<std::size_t> doubling_levels(std::size_t count) {
  std::vector<std::size_t> out;
  for (std::size_t m = 1; m < count; m *= 2) out.push_back(m);
  out.push_back(count);
  return out;
}

Point random_point(std::mt19937_64& rng, int dim, double lo, double hi) {
  const double a = uniform(rng, lo, hi);
  const double b = dim == 2 ? uniform(rng, lo, hi) : 0.0;
  return {a, b};
}

QVector random_vector(std::mt19937_64& rng, std::size_t n) {
  QVector v(n);
  for (auto& q : v) q = random_quaternion(rng);
  return v;
}

QMatrix random_matrix(std::mt19937_64& rng, std::size_t n) {
  QMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (auto& q : m.row(r)) q = random_quaternion(rng);
  return m;
}

double gram_defect(const std::vector<QVector>& vs) {
  double worst = 0.0;
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (std::size_t b = 0; b < vs.size(); ++b)
      worst = std::max(worst, norm(inner(vs[a], vs[b]) - Quaternion(a == b ? 1.0 : 0.0)));
  return worst;
}

void algebra_suite(Recorder& r, std::mt19937_64& rng) {
  r.suite("algebra");
  double nm = 0.0, as = 0.0, cj = 0.0, iv = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto p = random_quaternion(rng);
    const auto q = random_quaternion(rng);
    const auto s = random_quaternion(rng);
    nm = std::max(nm, std::fabs(norm(p * q) - norm(p) * norm(q)));
    as = std::max(as, norm((p * q) * s - p * (q * s)));
    cj = std::max(cj, norm(conj(p * q) - conj(q) * conj(p)));
    if (norm(p) > 1e-3) {
      const auto pi = inverse(p);
      iv = std::max(iv, norm(p * pi - Quaternion(1.0)) + norm(pi * p - Quaternion(1.0)));
    }
  }
  r.check("algebra.norm_multiplicative", nm, "10000 random triples");
  r.check("algebra.associativity", as, "10000 random triples");
  r.check("algebra.conj_antihomomorphism", cj, "10000 random triples");
  r.check("algebra.inverse", iv, "10000 random triples");

  double em = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto P = random_matrix(rng, 5);
    const auto Q = random_matrix(rng, 5);
    const Eigen::MatrixXcd lhs = embed(product(P, Q)).matrix;
    const Eigen::MatrixXcd rhs = embed(P).matrix * embed(Q).matrix;
    em = std::max(em, (lhs - rhs).norm() / (frobenius_norm(P) * frobenius_norm(Q)));
  }
  r.check("algebra.embed_homomorphism", em, "100 random 5x5 pairs");
}

void spectral_suite(Recorder& r, std::mt19937_64& rng, std::size_t trials) {
  r.suite("spectral");
  const std::size_t n = 16;
  double modulus = 0.0, ortho = 0.0, resid = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<QVector> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(random_vector(rng, n));
    const auto basis = gram_schmidt(rows);
    QMatrix u(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) u(i, j) = basis[i][j];
    std::vector<Quaternion> lambdas(n);
    for (auto& l : lambdas) l = random_quaternion(rng, -2.0, 2.0);
    // a tie in modulus between different orbits
    lambdas[3] = Quaternion(0.0, 1.5, 0.0, 0.0);
    lambdas[4] = Quaternion(1.5);
    const auto m = product(product(adjoint(u), QMatrix::diagonal(lambdas)), u);
    const auto d = eig_normal(m);

    std::vector<double> want, got;
    for (const auto& l : lambdas) want.push_back(norm(l));
    for (const auto& l : d.eigenvalues) got.push_back(norm(l));
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    if (got.size() != want.size()) {
      modulus = std::numeric_limits<double>::infinity();
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) modulus = std::max(modulus, std::fabs(want[k] - got[k]));
    ortho = std::max(ortho, gram_defect(d.eigenvectors));
    const double mn = frobenius_norm(m);
    for (std::size_t k = 0; k < d.size(); ++k)
      resid = std::max(resid, norm(apply(m, d.eigenvectors[k]) - scale(d.eigenvalues[k], d.eigenvectors[k])) / mn);
  }
  const auto what = std::to_string(trials) + " planted normal 16x16 matrices";
  r.check("spectral.planted_modulus", modulus, what);
  r.check("spectral.orthonormality", ortho, what);
  r.check("spectral.normal_residual", resid, what);
}

bool admissibility_suite(Recorder& r, const KernelSpec& spec, const QuadratureGrid& grid, std::uint64_t seed) {
  r.suite("admissibility");
  const auto rep = check_admissibility(spec, grid, 20, seed);
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    const auto& c = rep.checks[i];
    std::string detail = c.name;
    if (!c.detail.empty()) detail += "; " + c.detail;
    if (i == 1) detail += "; lower bound";
    // Module tolerances scale with the kernel, so they are not overridable.
    r.raw({"", "admissibility.condition-" + std::to_string(i + 1), c.worst, c.tolerance, c.passed, detail});
  }
  return rep.passed();
}

double analytic_trace(const KernelSpec& spec) {
  if (const auto* s = std::get_if<Sinc1D>(&spec)) return 2.0 * s->sigma * s->tau / kPi;
  if (const auto* q = std::get_if<QftSeparable2D>(&spec)) return 4.0 * q->tau * q->tau;
  return std::numeric_limits<double>::quiet_NaN();
}

double diagonal_S(const KernelSpec& spec, const QuadratureGrid& grid, const Point& x) {
  if (std::holds_alternative<Tabulated>(spec)) return quadrature_S(spec, grid, x, x).w;
  return eval_S(spec, x, x);
}

// Range of x used for random draws: three domain widths for built-ins.
std::array<double, 2> draw_range(const KernelSpec& spec) {
  auto r = x_range(spec, 0);
  if (!std::isfinite(r[0])) {
    const double tau = kernel_tau(spec);
    r = {-3.0 * tau, 3.0 * tau};
  }
  return r;
}

void eigensystem_suite(Recorder& r, const NystromOperator& op, const PsqwsBasis& b, std::mt19937_64& rng) {
  r.suite("eigensystem");
  const int dim = op.grid.dim;
  const double trace = kernel_trace(op);
  const auto [lhs, all] = trace_identity(b);
  (void)lhs;
  const double analytic = analytic_trace(op.spec);
  const double ref = std::isfinite(analytic) ? analytic : trace;
  std::ostringstream td;
  td.precision(15);
  td << "sum mu = " << all << ", " << (std::isfinite(analytic) ? "analytic " : "quadrature ") << "trace = " << ref;
  r.check("eigensystem.trace_identity", std::fabs(all - ref) / ref, td.str());

  r.check("eigensystem.normality", normality_defect(op));
  r.check("eigensystem.kernel_defect", kernel_defect(op));

  double lin = 0.0;
  const double tn = frobenius_norm(op.T);
  for (int t = 0; t < 10; ++t) {
    const auto q = random_quaternion(rng);
    const auto u = random_vector(rng, op.grid.size());
    const auto d = apply(op.T, scale(q, u)) - scale(q, apply(op.T, u));
    lin = std::max(lin, norm(d) / (norm(q) * norm(u) * tn));
  }
  r.check("eigensystem.left_linearity", lin, "10 random vectors");

  double lm = 0.0;
  for (std::size_t n = 0; n < b.count(); ++n) lm = std::max(lm, std::fabs(norm2(b.lambda[n]) - b.mu[n]) / b.mu[n]);
  r.check("eigensystem.lambda_mu", lm, std::to_string(b.count()) + " retained modes");

  double go = 0.0;
  for (std::size_t m = 0; m < b.count(); ++m)
    for (std::size_t n = 0; n < b.count(); ++n) {
      Quaternion g;
      for (std::size_t k = 0; k < b.grid.size(); ++k) g += b.grid.weights[k] * b.Phi[m][k] * conj(b.Phi[n][k]);
      go = std::max(go, norm(g - Quaternion(m == n ? 1.0 : 0.0)));
    }
  r.check("eigensystem.orthonormality", go);

  const std::size_t top = std::min<std::size_t>(10, b.count());
  double ne = 0.0;
  for (std::size_t k = 0; k < b.grid.size(); ++k) {
    const auto v = extend_all(b, b.grid.nodes[k], top);
    for (std::size_t n = 0; n < top; ++n) ne = std::max(ne, norm(v[n] - b.phi_at_node(n, k)));
  }
  r.check("eigensystem.node_extension", ne, "top " + std::to_string(top) + " modes at every node");

  const auto range = draw_range(b.spec);
  double ke = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto x = random_point(rng, dim, range[0], range[1]);
    for (std::size_t n = 0; n < top; ++n) ke = std::max(ke, norm(kernel_equation_residual(b, n, x)));
  }
  r.check("eigensystem.kernel_equation", ke, "top " + std::to_string(top) + " modes, 20 random x");

  const auto fine = gauss_legendre_grid(dim, op.grid.tau, op.grid.n_per_axis + op.grid.n_per_axis / 2);
  std::vector<std::vector<Quaternion>> vals;
  for (const auto& w : fine.nodes) vals.push_back(extend_all(b, w, top));
  double dual = 0.0;
  for (std::size_t m = 0; m < top; ++m)
    for (std::size_t n = 0; n < top; ++n) {
      Quaternion g;
      for (std::size_t k = 0; k < fine.size(); ++k) g += fine.weights[k] * vals[k][m] * conj(vals[k][n]);
      dual = std::max(dual, norm(g - Quaternion(m == n ? b.mu[n] : 0.0)));
    }
  const bool table = std::holds_alternative<Tabulated>(b.spec);
  r.check(table ? "eigensystem.dual_orthogonality_table" : "eigensystem.dual_orthogonality", dual,
          std::to_string(fine.n_per_axis) + "-point rule per axis, top " + std::to_string(top) + " modes");
}

void tensor_suite(Recorder& r, const KernelSpec& spec, const PsqwsBasis& b1, std::size_t direct_nodes,
                  std::uint64_t seed) {
  r.suite("tensor");
  const auto rep = cross_validate_tensor(spec, b1, direct_nodes, 10, seed);
  r.check("tensor.mu_match", rep.worst_mu_rel,
          "direct " + std::to_string(direct_nodes) + "^2 vs 1D " + std::to_string(b1.grid.n_per_axis) + " nodes, top " +
              std::to_string(rep.compared));
  r.check("tensor.constant", std::fabs(rep.fitted_constant / rep.analytic_constant - 1.0));
  const auto found = rep.direct_pairs.size();
  const auto want = rep.predicted_pairs;
  r.count("tensor.degenerate_pairs", found > want ? found - want : want - found,
          std::to_string(found) + " found, " + std::to_string(want) + " predicted");
  r.check("tensor.phi00_correlation", 1.0 - rep.phi00_correlation);
  r.check("tensor.residual", rep.worst_tensor_residual);
}

void expansion_suite(Recorder& r, const PsqwsBasis& b, std::mt19937_64& rng) {
  r.suite("expansion");
  const int dim = b.grid.dim;
  const double tau = b.grid.tau;
  std::vector<std::pair<Point, Point>> pts;
  for (int t = 0; t < 5; ++t)
    pts.push_back({random_point(rng, dim, -0.9 * tau, 0.9 * tau), random_point(rng, dim, -0.9 * tau, 0.9 * tau)});
  const auto rep = expansion_residuals(b, pts);
  std::vector<double> e, s;
  for (const auto& l : rep.levels) {
    e.push_back(l.e_residual);
    s.push_back(l.s_diagonal);
  }
  std::size_t e_up = 0, s_up = 0;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i] > e[i - 1]) ++e_up;
    if (s[i] > s[i - 1]) ++s_up;
  }
  r.count("expansion.e_monotone", e_up, "levels: " + join(e));
  r.count("expansion.s_diagonal_monotone", s_up, "levels: " + join(s));
  double sxx = 0.0;
  for (const auto& p : pts) sxx = std::max(sxx, diagonal_S(b.spec, b.grid, p.first));
  r.check("expansion.s_diagonal", std::fabs(rep.levels.back().s_diagonal) / sxx,
          std::to_string(b.count()) + " modes, " + std::to_string(b.grid.size()) + " nodes");
}

void sampling_suite(Recorder& r, const KernelSpec& spec, const PsqwsBasis& psqws, const PsqwsBasis* full,
                    std::uint64_t seed) {
  r.suite("sampling");
  const int dim = kernel_dim(spec);
  const double tau = kernel_tau(spec);
  const auto grid = gauss_legendre_grid(dim, tau, 64);
  const auto f = synth(spec, grid, seed, SignalShape::smooth);
  std::mt19937_64 rng(seed + 1);
  std::vector<Point> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(random_point(rng, dim, -tau, tau));
  std::vector<Quaternion> exact;
  double peak = 0.0;
  for (const auto& x : xs) {
    exact.push_back(eval(f, x));
    peak = std::max(peak, norm(exact.back()));
  }

  const auto s6 = sample_lattice(f, 6);
  double lat = 0.0;
  for (std::size_t n = 0; n < s6.points.size(); ++n)
    lat = std::max(lat, norm(reconstruct_wsk(s6, spec, s6.points[n]) - s6.values[n]));
  r.check("sampling.wsk_lattice", lat, std::to_string(s6.points.size()) + " lattice points");

  std::vector<double> wsk;
  SampledSignal s16;
  for (std::size_t n_max : {8, 16, 32}) {
    const auto s = sample_lattice(f, n_max);
    double err = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) err = std::max(err, norm(reconstruct_wsk(s, spec, xs[i]) - exact[i]));
    wsk.push_back(err / peak);
    if (n_max == 16) s16 = s;
  }
  r.check("sampling.wsk_interior", wsk.back(), "20 interior points");
  r.count("sampling.wsk_monotone", rises(wsk), "N_max 8/16/32: " + join(wsk));

  std::vector<Quaternion> wsk16;
  for (const auto& x : xs) wsk16.push_back(reconstruct_wsk(s16, spec, x));
  std::vector<double> gaps;
  for (std::size_t modes : doubling_levels(psqws.count())) {
    const auto rec = reconstruct_psqws(s16, psqws, xs, modes);
    double gap = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) gap = std::max(gap, norm(rec[i] - wsk16[i]));
    gaps.push_back(gap / peak);
  }
  std::ostringstream pd;
  pd.precision(3);
  pd << psqws.count() << " modes; WSK truncation at N_max 16: " << wsk[1];
  r.check("sampling.psqws_agreement", gaps.back(), pd.str());
  // Below 1e-8 the gap is set by lattice truncation, not by the mode count.
  r.count("sampling.psqws_monotone", rises(gaps, 1e-8), "gaps: " + join(gaps));

  // Discrete orthogonality over |n| <= 2 per axis.
  const auto idx = lattice_indices(dim, 2);
  std::vector<std::vector<Quaternion>> phi;
  for (const auto& n : idx) phi.push_back(extend_all(psqws, lattice_point(spec, n), psqws.count()));
  const double wt = lattice_weight(spec);
  std::vector<double> worst;
  for (std::size_t modes : doubling_levels(psqws.count())) {
    double w = 0.0;
    for (std::size_t l = 0; l < idx.size(); ++l)
      for (std::size_t m = 0; m < idx.size(); ++m) {
        Quaternion acc;
        for (std::size_t n = 0; n < modes; ++n) acc += conj(phi[l][n]) * phi[m][n];
        w = std::max(w, norm(wt * acc - Quaternion(l == m ? 1.0 : 0.0)));
      }
    worst.push_back(w);
  }
  r.check("sampling.discrete_orthogonality", worst.back(),
          std::to_string(idx.size()) + " lattice points, " + std::to_string(psqws.count()) + " modes");
  r.count("sampling.discrete_orthogonality_monotone", rises(worst), "levels: " + join(worst));

  if (full) {
    double iso = 0.0;
    for (std::uint64_t t = 0; t < 10; ++t) {
      const auto a = synth(spec, full->grid, seed + 10 + 2 * t);
      const auto c = synth(spec, full->grid, seed + 11 + 2 * t);
      iso = std::max(iso, norm(h_inner(a, c) - h_inner_coefficients(a, c, *full)));
    }
    r.check("sampling.isometry", iso, "10 random pairs, " + std::to_string(full->count()) + " modes");
  }

  const auto g = synth(spec, grid, seed + 2, SignalShape::smooth);
  const auto hfg = h_inner(f, g);
  std::vector<double> pe;
  for (std::size_t n_max : {4, 8, 16}) pe.push_back(norm(lattice_parseval(sample_lattice(f, n_max), sample_lattice(g, n_max), spec) - hfg));
  const double ff = h_inner(f, f).w;
  r.check("sampling.plancherel", pe.back() / ff);
  r.count("sampling.plancherel_monotone", rises(pe), "N_max 4/8/16: " + join(pe));
}

void concentration_suite(Recorder& r, const NystromOperator& op, const PsqwsBasis& b, std::size_t trials,
                         std::uint64_t seed) {
  r.suite("concentration");
  const auto mode_check = [&](const std::string& name, std::size_t n) {
    const auto c = concentration_ratio(make_signal(op.spec, op.grid, b.Phi[n]), b, op);
    const double e = std::max(std::fabs(c.coefficient / b.mu[n] - 1.0), std::fabs(c.quadrature / b.mu[n] - 1.0));
    std::ostringstream d;
    d.precision(15);
    d << "mu = " << b.mu[n];
    r.check(name, e, d.str());
  };
  mode_check("concentration.extremizer", 0);
  if (b.count() > 1) mode_check("concentration.second_mode", 1);

  double best = 0.0, forms = 0.0;
  std::size_t proj_bad = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto f = synth(op.spec, op.grid, seed + t, t % 2 ? SignalShape::white : SignalShape::smooth);
    const auto c = concentration_ratio(f, b, op);
    best = std::max(best, c.quadrature);
    forms = std::max(forms, std::fabs(c.coefficient - c.quadrature) / c.quadrature);
    const auto a = coefficients(f, b);
    if (norm(a[0]) > 0.0) {
      const auto proj = make_signal(op.spec, op.grid, scale(a[0], b.Phi[0]));
      if (concentration_ratio(proj, b, op).quadrature < c.quadrature * (1.0 - 1e-12)) ++proj_bad;
    }
  }
  std::ostringstream d;
  d.precision(15);
  d << trials << " signals; best beta = " << best << ", mu_1 = " << b.mu[0];
  r.check("concentration.bound", best / b.mu[0] - 1.0, d.str());
  r.check("concentration.forms_agree", forms);
  r.count("concentration.projection", proj_bad);
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const Invariant& i) { return i.passed; });
}

const Invariant* VerifyReport::find(const std::string& name) const {
  for (const auto& i : invariants)
    if (i.name == name) return &i;
  return nullptr;
}

std::string VerifyReport::to_json() const {
  nlohmann::ordered_json j;
  auto& c = j["config"];
  c["kernel"] = kernel_name(config.spec);
  if (const auto s = kernel_sigma(config.spec)) c["sigma"] = *s;
  c["tau"] = kernel_tau(config.spec);
  c["dim"] = kernel_dim(config.spec);
  c["nodes_per_axis"] = nodes;
  c["seed"] = config.seed;
  c["retention_floor"] = config.retention_floor;
  c["trials"] = config.trials;
  c["spectral_trials"] = config.spectral_trials;
  c["tolerance_overrides"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.tolerance_overrides) c["tolerance_overrides"][k] = v;
  j["passed"] = passed();
  std::size_t failed = 0;
  for (const auto& i : invariants) failed += i.passed ? 0 : 1;
  j["failed"] = failed;
  auto inv = nlohmann::ordered_json::array();
  for (const auto& i : invariants) {
    nlohmann::ordered_json e;
    e["suite"] = i.suite;
    e["name"] = i.name;
    e["measured"] = i.measured;
    e["tolerance"] = i.tolerance;
    e["passed"] = i.passed;
    if (!i.detail.empty()) e["detail"] = i.detail;
    inv.push_back(std::move(e));
  }
  j["invariants"] = std::move(inv);
  auto sk = nlohmann::ordered_json::array();
  for (const auto& [suite, why] : skipped) sk.push_back({{"suite", suite}, {"reason", why}});
  j["skipped"] = std::move(sk);
  return j.dump(2) + "\n";
}

VerifyReport run_verify(const VerifyConfig& cfg) {
  validate(cfg.spec);
  for (const auto& [name, value] : cfg.tolerance_overrides) {
    const auto& t = default_tolerances();
    if (std::none_of(t.begin(), t.end(), [&](const ToleranceInfo& i) { return i.name == name; }))
      throw std::invalid_argument("verify: unknown tolerance '" + name + "'");
    if (!(value >= 0.0) || !std::isfinite(value))
      throw std::invalid_argument("verify: tolerance '" + name + "' must be finite and non-negative");
  }
  if (!(cfg.retention_floor >= 0.0 && cfg.retention_floor <= 1.0))
    throw std::invalid_argument("verify: retention floor must lie in [0, 1]");
  if (cfg.trials == 0) throw std::invalid_argument("verify: trials must be positive");

  const int dim = kernel_dim(cfg.spec);
  const double tau = kernel_tau(cfg.spec);
  VerifyReport rep;
  rep.config = cfg;
  rep.nodes = cfg.nodes ? cfg.nodes : (dim == 1 ? 64 : 24);
  if (rep.nodes < 2) throw std::invalid_argument("verify: nodes must be at least 2");
  Recorder r(cfg, rep);

  // One stream per suite, so adding checks to one suite leaves the others alone.
  const auto stream = [&](std::uint64_t k) { return std::mt19937_64(cfg.seed * 0x9E3779B97F4A7C15ULL + k); };

  auto rng = stream(1);
  algebra_suite(r, rng);
  rng = stream(2);
  spectral_suite(r, rng, cfg.spectral_trials);

  const auto grid = gauss_legendre_grid(dim, tau, rep.nodes);
  if (!admissibility_suite(r, cfg.spec, grid, cfg.seed)) {
    for (const char* s : {"eigensystem", "tensor", "expansion", "sampling", "concentration"})
      rep.skipped.push_back({s, "kernel is not admissible"});
    return rep;
  }

  const auto op = build(cfg.spec, grid, {.check_admissibility = false});
  const auto basis = eigensystem(op, cfg.retention_floor);
  rng = stream(3);
  eigensystem_suite(r, op, basis, rng);

  // 2D bases assembled from 1D ones: 64 nodes for cross-validation and
  // sampling, 32 for the kernel expansion.
  std::optional<PsqwsBasis> b64, tensor64, tensor32;
  const auto* qft = std::get_if<QftSeparable2D>(&cfg.spec);
  if (qft) {
    b64 = eigensystem(build(Sinc1D{qft->sigma, qft->tau}, gauss_legendre_grid(1, tau, 64)), cfg.retention_floor);
    tensor_suite(r, cfg.spec, *b64, rep.nodes, cfg.seed);
    tensor64 = tensor_eigensystem(cfg.spec, *b64, cfg.retention_floor);
    const auto b32 =
        eigensystem(build(Sinc1D{qft->sigma, qft->tau}, gauss_legendre_grid(1, tau, 32)), cfg.retention_floor);
    tensor32 = tensor_eigensystem(cfg.spec, b32, cfg.retention_floor);
  } else if (dim == 2) {
    rep.skipped.push_back({"tensor", "needs the separable 2D kernel"});
  } else {
    rep.skipped.push_back({"tensor", "2D only"});
  }

  rng = stream(4);
  expansion_suite(r, tensor32 ? *tensor32 : basis, rng);

  if (lattice_spacing(cfg.spec)) {
    if (dim == 1) {
      const auto& psqws = rep.nodes == 64 ? basis : *(b64 = eigensystem(build(cfg.spec, gauss_legendre_grid(1, tau, 64)),
                                                                         cfg.retention_floor));
      const auto full = eigensystem(op, 0.0);
      sampling_suite(r, cfg.spec, psqws, &full, cfg.seed + 100);
    } else {
      sampling_suite(r, cfg.spec, *tensor64, nullptr, cfg.seed + 100);
      rep.skipped.push_back({"sampling.isometry", "the complete basis is only formed in 1D"});
    }
  } else {
    rep.skipped.push_back({"sampling", "kernel has no known sampling lattice"});
  }

  concentration_suite(r, op, basis, cfg.trials, cfg.seed + 1000);
  return rep;
}

}  // namespace qsample
