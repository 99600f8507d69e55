#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qsample/sampling.hpp"
#include "test_support.hpp"

using namespace qsample;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
  KernelSpec spec;
  QuadratureGrid grid;
  PsqwsBasis basis;
};

const Setup& sinc_pi() {
  static const Setup s = [] {
    const KernelSpec spec = Sinc1D{kPi, 1.0};
    const auto grid = gauss_legendre_grid(1, 1.0, 64);
    return Setup{spec, grid, eigensystem(build(spec, grid))};
  }();
  return s;
}

std::vector<Point> interior_points(int dim, double tau, std::uint64_t seed, int count = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-tau, tau);
  std::vector<Point> xs;
  for (int i = 0; i < count; ++i) xs.push_back({u(rng), dim == 2 ? u(rng) : 0.0});
  return xs;
}

double relative_wsk_error(const BandlimitedSignal& f, std::size_t n_max, const std::vector<Point>& xs) {
  const auto s = sample_lattice(f, n_max);
  double err = 0.0, peak = 0.0;
  for (const auto& x : xs) {
    const auto exact = eval(f, x);
    peak = std::max(peak, norm(exact));
    err = std::max(err, norm(reconstruct_wsk(s, f.spec, x) - exact));
  }
  return err / peak;
}

}  // namespace

TEST_CASE("synth is deterministic per seed") {
  const auto& s = sinc_pi();
  for (auto shape : {SignalShape::white, SignalShape::smooth}) {
    const auto a = synth(s.spec, s.grid, 5, shape);
    const auto b = synth(s.spec, s.grid, 5, shape);
    const auto c = synth(s.spec, s.grid, 6, shape);
    CHECK(testing::max_abs_diff(a.F, b.F) == 0.0);
    CHECK(testing::max_abs_diff(a.F, c.F) > 0.0);
  }
  const auto w = synth(s.spec, s.grid, 5);
  for (const auto& q : w.F) {
    CHECK(std::max({std::fabs(q.w), std::fabs(q.x), std::fabs(q.y), std::fabs(q.z)}) <= 1.0);
  }
}

TEST_CASE("eval is the quadrature transform") {
  const auto& s = sinc_pi();
  const auto f = synth(s.spec, s.grid, 1);
  for (const auto& x : interior_points(1, 3.0, 2, 5)) {
    Quaternion direct;
    for (std::size_t k = 0; k < s.grid.size(); ++k)
      direct += s.grid.weights[k] * f.F[k] * conj(eval_E(s.spec, s.grid.nodes[k], x));
    CHECK(max_abs_diff(eval(f, x), direct) <= 1e-14);
  }
  const auto zero = make_signal(s.spec, s.grid, QVector(s.grid.size()));
  CHECK(norm(eval(zero, {0.7, 0.0})) == 0.0);
  CHECK_THROWS_AS(make_signal(s.spec, s.grid, QVector(3)), std::invalid_argument);
}

TEST_CASE("eval converges under grid refinement") {
  // The smooth shape is a fixed function of w, so it can be resampled.
  for (int dim : {1, 2}) {
    const KernelSpec spec = dim == 1 ? KernelSpec(Sinc1D{kPi, 1.0}) : KernelSpec(QftSeparable2D{kPi, 1.0});
    const std::size_t n = dim == 1 ? 64 : 32;
    const auto coarse = synth(spec, gauss_legendre_grid(dim, 1.0, n), 3, SignalShape::smooth);
    const auto fine = synth(spec, gauss_legendre_grid(dim, 1.0, 2 * n), 3, SignalShape::smooth);
    for (const auto& x : interior_points(dim, 1.0, 4, 10)) CHECK(max_abs_diff(eval(coarse, x), eval(fine, x)) <= 1e-9);
  }
}

TEST_CASE("eigenvector coefficients give eigenvalue times the eigenvector") {
  const auto& s = sinc_pi();
  for (std::size_t n : {0, 1, 3}) {
    const auto f = make_signal(s.spec, s.grid, s.basis.Phi[n]);
    for (std::size_t k = 0; k < s.grid.size(); k += 5)
      CHECK(max_abs_diff(eval(f, s.grid.nodes[k]), s.basis.lambda[n] * s.basis.Phi[n][k]) <= 1e-8);
  }
}

TEST_CASE("left linearity") {
  const auto& s = sinc_pi();
  std::mt19937_64 rng(8);
  const auto f = synth(s.spec, s.grid, 9, SignalShape::smooth);
  const auto q = testing::random_quaternion(rng);
  const auto g = make_signal(s.spec, s.grid, scale(q, f.F));
  const Point x{0.4, 0.0};
  CHECK(max_abs_diff(eval(g, x), q * eval(f, x)) <= 1e-14);

  const auto sf = sample_lattice(f, 8);
  const auto sg = sample_lattice(g, 8);
  CHECK(max_abs_diff(reconstruct_wsk(sg, s.spec, x), q * reconstruct_wsk(sf, s.spec, x)) <= 1e-14);
  const auto m = s.basis.count();
  CHECK(max_abs_diff(reconstruct_psqws(sg, s.basis, x, m), q * reconstruct_psqws(sf, s.basis, x, m)) <= 1e-14);
}

TEST_CASE("lattice sampling") {
  const auto& s = sinc_pi();
  const auto f = synth(s.spec, s.grid, 1);
  const auto s0 = sample_lattice(f, 0);
  REQUIRE(s0.points.size() == 1);
  CHECK(s0.points[0] == Point{0.0, 0.0});
  CHECK(sample_lattice(f, 3).points.size() == 7);

  const KernelSpec q2 = QftSeparable2D{2.0, 1.0};
  const auto g2 = gauss_legendre_grid(2, 1.0, 8);
  const auto s2 = sample_lattice(synth(q2, g2, 1), 2);
  CHECK(s2.points.size() == 25);
  CHECK(s2.points[0][0] == doctest::Approx(-kPi));
  CHECK_NOTHROW(validate(s2));

  const auto tab = load_tabulated_csv(QSAMPLE_TEST_DATA "/sinc1d_table.csv");
  const auto tg = gauss_legendre_grid(1, tab.tau, 8);
  CHECK_THROWS_AS(sample_lattice(synth(tab, tg, 1), 2), std::invalid_argument);
}

TEST_CASE("lattice sections are orthonormal") {
  for (int dim : {1, 2}) {
    const KernelSpec spec = dim == 1 ? KernelSpec(Sinc1D{kPi, 1.0}) : KernelSpec(QftSeparable2D{1.0, 1.0});
    const auto grid = gauss_legendre_grid(dim, 1.0, dim == 1 ? 64 : 48);
    const auto idx = lattice_indices(dim, dim == 1 ? 4 : 2);
    const double wt = lattice_weight(spec);
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) {
        const auto g = quadrature_S(spec, grid, lattice_point(spec, idx[b]), lattice_point(spec, idx[a]));
        CHECK(max_abs_diff(wt * g, Quaternion(a == b ? 1.0 : 0.0)) <= 1e-10);
      }
  }
  CHECK(lattice_weight(Sinc1D{2.0, 1.0}) == doctest::Approx(kPi / 2.0));
  CHECK(lattice_weight(QftSeparable2D{2.0, 3.0}) == 1.0);
}

TEST_CASE("sample validation") {
  SampledSignal s;
  s.points = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}};
  s.values = {Quaternion(1.0), Quaternion(2.0), Quaternion(3.0)};
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s.points[2] = {2.0, 0.0};
  CHECK_NOTHROW(validate(s));
  s.values[1].y = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s.values.pop_back();
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
}

TEST_CASE("wsk reconstruction") {
  for (int dim : {1, 2}) {
    const KernelSpec spec = dim == 1 ? KernelSpec(Sinc1D{kPi, 1.0}) : KernelSpec(QftSeparable2D{kPi, 1.0});
    const auto grid = gauss_legendre_grid(dim, 1.0, 64);
    const auto f = synth(spec, grid, 21, SignalShape::smooth);
    const auto s = sample_lattice(f, 6);
    for (std::size_t n = 0; n < s.points.size(); ++n)
      CHECK(max_abs_diff(reconstruct_wsk(s, spec, s.points[n]), s.values[n]) <= 1e-12);

    SampledSignal zero = s;
    std::fill(zero.values.begin(), zero.values.end(), Quaternion{});
    CHECK(norm(reconstruct_wsk(zero, spec, {0.3, 0.2})) == 0.0);

    const auto xs = interior_points(dim, 1.0, 22);
    const double e8 = relative_wsk_error(f, 8, xs);
    const double e16 = relative_wsk_error(f, 16, xs);
    const double e32 = relative_wsk_error(f, 32, xs);
    CHECK(e16 < e8);
    CHECK(e32 < e16);
    CHECK(e32 <= 1e-2);
  }
}

TEST_CASE("wsk reconstruction with sigma other than pi") {
  const KernelSpec spec = Sinc1D{2.0, 1.5};
  const auto grid = gauss_legendre_grid(1, 1.5, 64);
  const auto f = synth(spec, grid, 23, SignalShape::smooth);
  const auto s = sample_lattice(f, 4);
  for (std::size_t n = 0; n < s.points.size(); ++n)
    CHECK(max_abs_diff(reconstruct_wsk(s, spec, s.points[n]), s.values[n]) <= 1e-12);
  const auto xs = interior_points(1, 1.5, 24);
  const double e16 = relative_wsk_error(f, 16, xs);
  const double e32 = relative_wsk_error(f, 32, xs);
  CHECK(e32 < e16);
  CHECK(e32 <= 1e-2);
}

TEST_CASE("psqws reconstruction") {
  const auto& s = sinc_pi();
  const auto m = s.basis.count();
  const auto xs = interior_points(1, 1.0, 31, 10);

  const auto f = synth(s.spec, s.grid, 32, SignalShape::smooth);
  const auto samples = sample_lattice(f, 16);
  CHECK(norm(reconstruct_psqws(samples, s.basis, {0.2, 0.0}, 0)) == 0.0);
  CHECK_THROWS_AS(reconstruct_psqws(samples, s.basis, {0.2, 0.0}, m + 1), std::out_of_range);

  // f = phi_1 on the lattice
  const auto phi1 = make_signal(s.spec, s.grid, s.basis.Phi[0]);
  const auto ps = sample_lattice(phi1, 16);
  const auto rec = reconstruct_psqws(ps, s.basis, xs, m);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(max_abs_diff(rec[i], extend(s.basis, 0, xs[i])) <= 5e-2);

  // agreement with wsk, improving with modes
  double peak = 0.0;
  for (const auto& x : xs) peak = std::max(peak, norm(eval(f, x)));
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t modes : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{8}, m}) {
    const auto r = reconstruct_psqws(samples, s.basis, xs, modes);
    double gap = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      gap = std::max(gap, norm(r[i] - reconstruct_wsk(samples, s.spec, xs[i])));
    CHECK(gap / peak <= prev);
    prev = gap / peak;
  }
  const double wsk_err = relative_wsk_error(f, 16, xs);
  CHECK(prev <= std::max(wsk_err, 1e-6));
}

TEST_CASE("discrete orthogonality") {
  const auto& s = sinc_pi();
  const auto m = s.basis.count();
  CHECK(norm(discrete_orthogonality(s.basis, {0, 0}, {0, 0}, 0)) == 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t modes : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{8}, m}) {
    double worst = 0.0;
    for (int l = -2; l <= 2; ++l)
      for (int k = -2; k <= 2; ++k) {
        const auto v = discrete_orthogonality(s.basis, {l, 0}, {k, 0}, modes);
        worst = std::max(worst, norm(v - Quaternion(l == k ? 1.0 : 0.0)));
      }
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev <= 0.05);
  // the diagonal climbs to 1 one mode at a time
  double last = 0.0;
  for (std::size_t modes = 1; modes <= m; ++modes) {
    const double v = discrete_orthogonality(s.basis, {1, 0}, {1, 0}, modes).w;
    CHECK(v >= last);
    last = v;
  }
}

TEST_CASE("energy concentration") {
  const auto& s = sinc_pi();
  const auto& b = s.basis;
  for (std::size_t n : {0, 1}) {
    const auto c = concentration_ratio(make_signal(s.spec, s.grid, b.Phi[n]), b);
    CHECK(c.coefficient == doctest::Approx(b.mu[n]).epsilon(1e-8));
    CHECK(c.quadrature == doctest::Approx(b.mu[n]).epsilon(1e-8));
  }
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto f = synth(s.spec, s.grid, 1000 + seed, seed % 2 ? SignalShape::white : SignalShape::smooth);
    const auto c = concentration_ratio(f, b);
    worst = std::max(worst, c.quadrature);
    CHECK(std::fabs(c.coefficient - c.quadrature) <= 1e-8 * c.quadrature);
    // projecting onto Phi_1 reaches mu_1, never less than beta_f
    const auto a = coefficients(f, b);
    const auto proj = make_signal(s.spec, s.grid, scale(a[0], b.Phi[0]));
    CHECK(concentration_ratio(proj, b).quadrature >= c.quadrature);
  }
  CHECK(worst <= b.mu[0] * (1.0 + 1e-8));
  // the transform-matrix form agrees with pointwise evaluation
  const auto op = build(s.spec, s.grid);
  for (std::uint64_t seed : {5, 6}) {
    const auto f = synth(s.spec, s.grid, seed, seed % 2 ? SignalShape::white : SignalShape::smooth);
    const auto a = concentration_ratio(f, b);
    const auto m = concentration_ratio(f, b, op);
    CHECK(m.coefficient == a.coefficient);
    CHECK(std::fabs(m.quadrature - a.quadrature) <= 1e-13);
  }
  CHECK_THROWS_AS(concentration_ratio(make_signal(s.spec, s.grid, QVector(s.grid.size())), b), std::invalid_argument);
}

TEST_CASE("isometry of the range") {
  const auto& s = sinc_pi();
  const auto full = eigensystem(build(s.spec, s.grid), 0.0);
  CHECK(full.count() == s.grid.size());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = synth(s.spec, s.grid, 2 * seed);
    const auto g = synth(s.spec, s.grid, 2 * seed + 1);
    CHECK(max_abs_diff(h_inner(f, g), h_inner_coefficients(f, g, full)) <= 1e-10);
  }
}

TEST_CASE("lattice parseval") {
  for (int dim : {1, 2}) {
    const KernelSpec spec = dim == 1 ? KernelSpec(Sinc1D{kPi, 1.0}) : KernelSpec(QftSeparable2D{kPi, 1.0});
    const auto grid = gauss_legendre_grid(dim, 1.0, 64);
    const auto f = synth(spec, grid, 41, SignalShape::smooth);
    const auto g = synth(spec, grid, 42, SignalShape::smooth);
    const auto exact = h_inner(f, g);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {4, 8, 16}) {
      const double err = norm(lattice_parseval(sample_lattice(f, n), sample_lattice(g, n), spec) - exact);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev <= 1e-3 * norm(h_inner(f, f)));
  }
}

TEST_CASE("trace identity") {
  const auto [lhs, rhs] = trace_identity(sinc_pi().basis);
  CHECK(lhs == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::fabs(lhs - rhs) <= 1e-10 * lhs);

  const auto b1 = eigensystem(build(Sinc1D{1.0, 1.0}, gauss_legendre_grid(1, 1.0, 32)));
  const auto tb = tensor_eigensystem(QftSeparable2D{1.0, 1.0}, b1);
  const auto [l2, r2] = trace_identity(tb);
  CHECK(l2 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::fabs(l2 - r2) <= 1e-10 * l2);

  const auto direct = eigensystem(build(QftSeparable2D{1.0, 1.0}, gauss_legendre_grid(2, 1.0, 10)));
  const auto [l3, r3] = trace_identity(direct);
  CHECK(l3 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::fabs(l3 - r3) <= 1e-10 * l3);
}
