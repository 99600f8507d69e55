#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "qsample/errors.hpp"
#include "qsample/kernels.hpp"

using namespace qsample;

namespace {

const double pi = std::numbers::pi;

std::string data_path(const char* name) { return std::string(QSAMPLE_TEST_DATA) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST_CASE("gauss-legendre examples") {
  const auto g = gauss_legendre_grid(1, 1.0, 2);
  REQUIRE(g.size() == 2);
  CHECK(g.nodes[0][0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g.nodes[1][0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.weights[1] == doctest::Approx(1.0).epsilon(1e-15));
  double x2 = 0.0;
  for (std::size_t k = 0; k < 2; ++k) x2 += g.weights[k] * g.nodes[k][0] * g.nodes[k][0];
  CHECK(std::fabs(x2 - 2.0 / 3.0) <= 1e-15);

  const auto g2 = gauss_legendre_grid(2, 1.0, 16);
  double total = 0.0;
  for (double w : g2.weights) total += w;
  CHECK(std::fabs(total - 4.0) <= 1e-13);
  CHECK(g2.nodes[1 * 16 + 3][0] == g2.nodes[1 * 16][0]);
  CHECK(g2.nodes[1 * 16 + 3][1] == g2.nodes[3][1]);

  const auto g8 = gauss_legendre_grid(1, 2.0, 8);
  double x4 = 0.0;
  for (std::size_t k = 0; k < 8; ++k) x4 += g8.weights[k] * std::pow(g8.nodes[k][0], 4);
  CHECK(std::fabs(x4 - 64.0 / 5.0) <= 1e-12);

  CHECK_THROWS_AS(gauss_legendre_grid(1, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre_grid(3, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre_grid(1, -1.0, 4), std::invalid_argument);
}

TEST_CASE("gauss-legendre exactness up to degree 2n-1") {
  for (std::size_t n : {3u, 7u, 20u, 64u}) {
    const auto r = gauss_legendre_rule(n);
    for (std::size_t deg = 0; deg < 2 * n; deg += 2) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += r.weights[k] * std::pow(r.nodes[k], static_cast<double>(deg));
      CHECK(std::fabs(s - 2.0 / static_cast<double>(deg + 1)) <= 1e-13);
    }
    for (std::size_t k = 0; k + 1 < n; ++k) CHECK(r.nodes[k] < r.nodes[k + 1]);
  }
}

TEST_CASE("eval_E") {
  const KernelSpec q{QftSeparable2D{2.0, 1.5}};
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(-1.5, 1.5), x(-20.0, 20.0);
  CHECK(max_abs_diff(eval_E(q, {0, 0}, {x(rng), x(rng)}), Quaternion(1.0 / 3.0)) <= 1e-16);
  for (int t = 0; t < 200; ++t) {
    const Point w{d(rng), d(rng)};
    const Point v{d(rng), d(rng)};
    CHECK(norm(eval_E(q, w, {x(rng), x(rng)})) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(max_abs_diff(eval_E(q, w, v), eval_E(q, v, w)) <= 1e-15);
  }
  // Factor order: the i exponential is on the left.
  const Point w{0.5, 0.7};
  const Point p{1.1, -0.4};
  const auto expected = (1.0 / 3.0) * (cis_i(-2.0 * 1.1 * 0.5 / 1.5) * cis_j(-2.0 * -0.4 * 0.7 / 1.5));
  CHECK(max_abs_diff(eval_E(q, w, p), expected) <= 1e-16);
  CHECK_THROWS_AS(eval_E(q, {1.6, 0.0}, p), std::domain_error);

  const KernelSpec s{Sinc1D{pi, 1.0}};
  CHECK(norm(eval_E(s, {0.3, 0}, {2.0, 0})) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("eval_S closed form") {
  const KernelSpec q{QftSeparable2D{1.7, 1.0}};
  CHECK(eval_S(q, {0.3, -2.0}, {0.3, -2.0}) == 1.0);
  const double h = pi / 1.7;
  for (int n1 = -2; n1 <= 2; ++n1)
    for (int n2 = -2; n2 <= 2; ++n2)
      for (int m1 = -2; m1 <= 2; ++m1)
        for (int m2 = -2; m2 <= 2; ++m2) {
          if (n1 == m1 && n2 == m2) continue;
          CHECK(std::fabs(eval_S(q, {h * n1, h * n2}, {h * m1, h * m2})) <= 1e-15);
        }
  const KernelSpec s{Sinc1D{2.5, 1.0}};
  CHECK(eval_S(s, {0.4, 0}, {0.4, 0}) == doctest::Approx(2.5 / pi).epsilon(1e-15));
  CHECK(eval_S(s, {0.1, 0}, {0.9, 0}) == doctest::Approx(std::sin(2.5 * 0.8) / (pi * 0.8)).epsilon(1e-14));
}

TEST_CASE("sinc series branch is continuous") {
  for (double t : {1e-7, 5e-7, 9.99e-7, 1.001e-6, 2e-6}) {
    const double series = 1.0 - t * t / 6.0 + t * t * t * t / 120.0;
    CHECK(std::fabs(sinc(t) - series) <= 2.5e-16);
    CHECK(sinc(-t) == sinc(t));
  }
  CHECK(sinc(0.0) == 1.0);
}

TEST_CASE("closed-form S matches quadrature") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> x(-3.0, 3.0);
  const KernelSpec q{QftSeparable2D{pi, 1.0}};
  const auto grid = gauss_legendre_grid(2, 1.0, 64);
  for (int t = 0; t < 20; ++t) {
    const Point a{x(rng), x(rng)};
    const Point b{x(rng), x(rng)};
    const auto s = quadrature_S(q, grid, a, b);
    CHECK(std::fabs(s.w - eval_S(q, a, b)) <= 1e-10);
    CHECK(norm(vector_part(s)) <= 1e-11);
  }
  const KernelSpec s1{Sinc1D{3.0, 1.3}};
  const auto g1 = gauss_legendre_grid(1, 1.3, 64);
  for (int t = 0; t < 20; ++t) {
    const Point a{x(rng), 0};
    const Point b{x(rng), 0};
    const auto s = quadrature_S(s1, g1, a, b);
    CHECK(std::fabs(s.w - eval_S(s1, a, b)) <= 1e-12);
    CHECK(norm(vector_part(s)) <= 1e-12);
  }
}

TEST_CASE("quadrature S converges spectrally") {
  const KernelSpec q{QftSeparable2D{8.0, 1.0}};
  const Point a{1.9, -2.3};
  const Point b{-0.8, 1.4};
  const double exact = eval_S(q, a, b);
  const double e16 = std::fabs(quadrature_S(q, gauss_legendre_grid(2, 1.0, 16), a, b).w - exact);
  const double e32 = std::fabs(quadrature_S(q, gauss_legendre_grid(2, 1.0, 32), a, b).w - exact);
  REQUIRE(e16 > 1e-10);
  CHECK(e32 / e16 < 1e-3);
}

TEST_CASE("sinc1d kernel matrix is positive semidefinite") {
  const KernelSpec s{Sinc1D{4.0, 1.0}};
  const auto g = gauss_legendre_grid(1, 1.0, 48);
  Eigen::MatrixXd m(48, 48);
  for (int a = 0; a < 48; ++a)
    for (int b = 0; b < 48; ++b)
      m(a, b) = std::sqrt(g.weights[a] * g.weights[b]) * eval_S(s, g.nodes[a], g.nodes[b]);
  CHECK((m - m.transpose()).norm() <= 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("admissibility of built-in kernels") {
  for (const auto& [sigma, tau] : {std::pair{1.0, 1.0}, {pi, 1.0}, {2.5, 0.7}, {0.5, 3.0}}) {
    const KernelSpec q{QftSeparable2D{sigma, tau}};
    const auto r = check_admissibility(q, gauss_legendre_grid(2, tau, 24), 50);
    for (const auto& c : r.checks) {
      INFO(c.name << " worst " << c.worst << " tol " << c.tolerance);
      CHECK(c.passed);
    }
    CHECK(r.checks[2].worst <= 1e-11);
    const KernelSpec s{Sinc1D{sigma, tau}};
    CHECK(check_admissibility(s, gauss_legendre_grid(1, tau, 64), 50).passed());
  }
}

TEST_CASE("conjugate of a kernel product keeps the factor order") {
  // For E = a b the conjugate is conj(b) conj(a). The swapped form
  // conj(a) conj(b) no longer reproduces the closed-form kernel.
  const double sigma = 2.0, tau = 1.0;
  const KernelSpec q{QftSeparable2D{sigma, tau}};
  const auto grid = gauss_legendre_grid(2, tau, 24);
  const auto factors = [&](const Point& w, const Point& x) {
    return std::pair{cis_i(-sigma * x[0] * w[0] / tau) / (2 * tau), cis_j(-sigma * x[1] * w[1] / tau)};
  };
  const Point x{0.7, -1.2};
  const Point y{-0.4, 0.9};
  Quaternion wrong;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto [ay, by] = factors(grid.nodes[k], y);
    const auto [ax, bx] = factors(grid.nodes[k], x);
    wrong += grid.weights[k] * ((ay * by) * (conj(ax) * conj(bx)));
  }
  const double exact = eval_S(q, x, y);
  CHECK(std::fabs(quadrature_S(q, grid, x, y).w - exact) <= 1e-12);
  CHECK(norm(quadrature_S(q, grid, x, y) - quadrature_S_reversed(q, grid, x, y)) <= 1e-13);
  CHECK(std::fabs(wrong.w - exact) >= 1e-2);
}

TEST_CASE("condition 4 detects non-commuting kernel products") {
  // Symmetric in (w, x), but E(w, y) and conj E(w, x) point along different
  // axes, so the two integrands differ.
  Tabulated t;
  t.dim = 1;
  t.tau = 1.0;
  t.axes.resize(2);
  for (int i = 0; i <= 8; ++i) {
    t.axes[0].push_back(-1.0 + 0.25 * i);
    t.axes[1].push_back(-1.0 + 0.25 * i);
  }
  for (double w : t.axes[0])
    for (double x : t.axes[1]) t.values.push_back(cis_i(w * x) * cis_j(w + x + 0.3));
  const auto r = check_admissibility(KernelSpec{t}, gauss_legendre_grid(1, 1.0, 16), 20);
  CHECK(r.checks[0].passed);
  CHECK_FALSE(r.checks[3].passed);
  CHECK(r.checks[3].worst > 1e-3);
}

TEST_CASE("tabulated kernels") {
  const auto table = load_tabulated_csv(data_path("sinc1d_table.csv"));
  CHECK(table.dim == 1);
  CHECK(table.tau == 1.0);
  CHECK(table.axes[0].size() == 17);
  const KernelSpec spec{table};
  const KernelSpec ref{Sinc1D{pi, 1.0}};
  // Exact at table nodes, linear in between.
  CHECK(max_abs_diff(eval_E(spec, {0.25, 0}, {-0.5, 0}), eval_E(ref, {0.25, 0}, {-0.5, 0})) <= 1e-15);
  const auto mid = eval_E(spec, {0.25, 0}, {-0.4375, 0});
  const auto lin = 0.5 * (eval_E(ref, {0.25, 0}, {-0.5, 0}) + eval_E(ref, {0.25, 0}, {-0.375, 0}));
  CHECK(max_abs_diff(mid, lin) <= 1e-15);
  CHECK_THROWS_AS(eval_E(spec, {0.0, 0}, {1.5, 0}), std::domain_error);

  const auto good = check_admissibility(spec, gauss_legendre_grid(1, 1.0, 32), 50);
  for (const auto& c : good.checks) {
    INFO(c.name << " worst " << c.worst);
    CHECK(c.passed);
  }
  const auto broken = check_admissibility(KernelSpec{load_tabulated_csv(data_path("broken_kernel.csv"))},
                                          gauss_legendre_grid(1, 1.0, 32), 50);
  CHECK_FALSE(broken.checks[0].passed);
  CHECK(broken.checks[0].worst > 1e-3);
  CHECK_FALSE(broken.passed());
}

TEST_CASE("tabulated CSV errors name row and column") {
  const auto bad_number = write_temp("qs_bad_number.csv", "w1,x1,w,x,y,z\n-1,0,1,0,0,0\n1,0,abc,0,0,0\n");
  try {
    load_tabulated_csv(bad_number);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("column 3") != std::string::npos);
  }
  const auto ragged = write_temp("qs_ragged.csv", "-1,0,1,0,0,0\n1,0,1,0,0\n");
  try {
    load_tabulated_csv(ragged);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  const auto holes = write_temp("qs_holes.csv", "-1,0,1,0,0,0\n1,1,1,0,0,0\n");
  CHECK_THROWS_AS(load_tabulated_csv(holes), InputError);
  const auto asym = write_temp("qs_asym.csv", "-1,0,1,0,0,0\n2,0,1,0,0,0\n");
  CHECK_THROWS_AS(load_tabulated_csv(asym), InputError);
  CHECK_THROWS_AS(load_tabulated_csv("/nonexistent/table.csv"), InputError);
}

TEST_CASE("kernel metadata") {
  const KernelSpec s{Sinc1D{2.0, 1.0}};
  CHECK(kernel_dim(s) == 1);
  CHECK(kernel_name(s) == "sinc1d");
  CHECK(*lattice_spacing(s) == doctest::Approx(pi / 2.0));
  CHECK_THROWS_AS(validate(KernelSpec{Sinc1D{-1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(KernelSpec{QftSeparable2D{1.0, 0.0}}), std::invalid_argument);
}
