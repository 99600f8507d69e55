#include "qsample/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qsample/errors.hpp"
#include "qsample/io.hpp"
#include "qsample/qlinalg.hpp"
#include "qsample/random.hpp"

namespace qsample {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kDomainSlack = 1e-12;

std::size_t table_size(const Tabulated& t) {
  std::size_t n = 1;
  for (const auto& a : t.axes) n *= a.size();
  return n;
}

// Locates c in a sorted axis: returns the left cell index and the fractional
// position inside the cell. Throws when c is outside the axis.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double c) {
  const double lo = axis.front();
  const double hi = axis.back();
  const double slack = kDomainSlack * std::max({1.0, std::fabs(lo), std::fabs(hi)});
  if (c < lo - slack || c > hi + slack) {
    throw std::domain_error("tabulated kernel: coordinate " + std::to_string(c) +
                            " outside table range");
  }
  if (axis.size() == 1) return {0, 0.0};
  c = std::clamp(c, lo, hi);
  auto it = std::upper_bound(axis.begin(), axis.end(), c);
  std::size_t i = static_cast<std::size_t>(it - axis.begin());
  i = std::clamp<std::size_t>(i, 1, axis.size() - 1) - 1;
  const double t = (c - axis[i]) / (axis[i + 1] - axis[i]);
  return {i, t};
}

Quaternion eval_tabulated(const Tabulated& t, const Point& w, const Point& x) {
  const std::size_t naxes = t.axes.size();
  std::array<double, 4> coord{};
  if (t.dim == 1) {
    coord = {w[0], x[0], 0.0, 0.0};
  } else {
    coord = {w[0], w[1], x[0], x[1]};
  }
  std::array<std::size_t, 4> cell{};
  std::array<double, 4> frac{};
  for (std::size_t a = 0; a < naxes; ++a) std::tie(cell[a], frac[a]) = locate(t.axes[a], coord[a]);

  Quaternion acc;
  for (std::size_t corner = 0; corner < (std::size_t{1} << naxes); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    bool skip = false;
    for (std::size_t a = 0; a < naxes; ++a) {
      const bool up = (corner >> a) & 1u;
      if (up && t.axes[a].size() == 1) {
        skip = true;
        break;
      }
      weight *= up ? frac[a] : 1.0 - frac[a];
      flat = flat * t.axes[a].size() + cell[a] + (up ? 1 : 0);
    }
    if (skip || weight == 0.0) continue;
    acc += weight * t.values[flat];
  }
  return acc;
}

}  // namespace

GaussLegendreRule gauss_legendre_rule(std::size_t n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_rule: need at least one node");
  // P_n(x) and P_n'(x) by the three-term recurrence.
  const auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) return std::pair{x, 1.0};
    return std::pair{p1, static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0)};
  };
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) <= 1e-16) break;
    }
    if (n % 2 == 1 && i == n / 2) x = 0.0;
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

QuadratureGrid gauss_legendre_grid(int dim, double tau, std::size_t n_per_axis) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("gauss_legendre_grid: dim must be 1 or 2");
  if (n_per_axis < 2) throw std::invalid_argument("gauss_legendre_grid: need at least 2 nodes per axis");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("gauss_legendre_grid: tau must be positive");
  const auto rule = gauss_legendre_rule(n_per_axis);
  QuadratureGrid g;
  g.dim = dim;
  g.tau = tau;
  g.n_per_axis = n_per_axis;
  if (dim == 1) {
    for (std::size_t i = 0; i < n_per_axis; ++i) {
      g.nodes.push_back({tau * rule.nodes[i], 0.0});
      g.weights.push_back(tau * rule.weights[i]);
    }
  } else {
    for (std::size_t i1 = 0; i1 < n_per_axis; ++i1)
      for (std::size_t i2 = 0; i2 < n_per_axis; ++i2) {
        g.nodes.push_back({tau * rule.nodes[i1], tau * rule.nodes[i2]});
        g.weights.push_back(tau * tau * rule.weights[i1] * rule.weights[i2]);
      }
  }
  return g;
}

int kernel_dim(const KernelSpec& spec) {
  return std::visit(overloaded{[](const Sinc1D&) { return 1; },
                               [](const QftSeparable2D&) { return 2; },
                               [](const Tabulated& t) { return t.dim; }},
                    spec);
}

double kernel_tau(const KernelSpec& spec) {
  return std::visit([](const auto& k) { return k.tau; }, spec);
}

std::string kernel_name(const KernelSpec& spec) {
  return std::visit(overloaded{[](const Sinc1D&) { return std::string("sinc1d"); },
                               [](const QftSeparable2D&) { return std::string("qft2d"); },
                               [](const Tabulated&) { return std::string("tabulated"); }},
                    spec);
}

std::optional<double> kernel_sigma(const KernelSpec& spec) {
  return std::visit(overloaded{[](const Sinc1D& k) -> std::optional<double> { return k.sigma; },
                               [](const QftSeparable2D& k) -> std::optional<double> { return k.sigma; },
                               [](const Tabulated&) -> std::optional<double> { return std::nullopt; }},
                    spec);
}

void validate(const KernelSpec& spec) {
  const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  std::visit(overloaded{[&](const Sinc1D& k) {
                          if (!positive(k.sigma)) throw std::invalid_argument("sinc1d: sigma must be positive");
                          if (!positive(k.tau)) throw std::invalid_argument("sinc1d: tau must be positive");
                        },
                        [&](const QftSeparable2D& k) {
                          if (!positive(k.sigma)) throw std::invalid_argument("qft2d: sigma must be positive");
                          if (!positive(k.tau)) throw std::invalid_argument("qft2d: tau must be positive");
                        },
                        [&](const Tabulated& t) {
                          if (t.dim != 1 && t.dim != 2) throw std::invalid_argument("tabulated: dim must be 1 or 2");
                          if (t.axes.size() != static_cast<std::size_t>(2 * t.dim))
                            throw std::invalid_argument("tabulated: wrong number of axes");
                          for (const auto& a : t.axes) {
                            if (a.empty()) throw std::invalid_argument("tabulated: empty axis");
                            if (!std::is_sorted(a.begin(), a.end()) ||
                                std::adjacent_find(a.begin(), a.end()) != a.end())
                              throw std::invalid_argument("tabulated: axes must be strictly increasing");
                          }
                          if (t.values.size() != table_size(t))
                            throw std::invalid_argument("tabulated: value count does not match axes");
                          if (!positive(t.tau)) throw std::invalid_argument("tabulated: tau must be positive");
                          for (int a = 0; a < t.dim; ++a) {
                            const auto& w = t.axes[static_cast<std::size_t>(a)];
                            const double slack = kDomainSlack * std::max(1.0, t.tau);
                            if (std::fabs(w.front() + t.tau) > slack || std::fabs(w.back() - t.tau) > slack)
                              throw std::invalid_argument("tabulated: w axes must span [-tau, tau]");
                          }
                        }},
             spec);
}

bool in_domain(const KernelSpec& spec, const Point& w) {
  const double tau = kernel_tau(spec);
  const double lim = tau * (1.0 + kDomainSlack);
  for (int a = 0; a < kernel_dim(spec); ++a)
    if (!(std::fabs(w[static_cast<std::size_t>(a)]) <= lim)) return false;
  return true;
}

Quaternion eval_E(const KernelSpec& spec, const Point& w, const Point& x) {
  if (!in_domain(spec, w)) throw std::domain_error("eval_E: w outside the concentration domain");
  return std::visit(
      overloaded{[&](const Sinc1D& k) {
                   const double c = std::sqrt(k.sigma / (2.0 * std::numbers::pi * k.tau));
                   return c * cis_i(-k.sigma * x[0] * w[0] / k.tau);
                 },
                 [&](const QftSeparable2D& k) {
                   return (1.0 / (2.0 * k.tau)) * (cis_i(-k.sigma * x[0] * w[0] / k.tau) *
                                                   cis_j(-k.sigma * x[1] * w[1] / k.tau));
                 },
                 [&](const Tabulated& t) { return eval_tabulated(t, w, x); }},
      spec);
}

double sinc(double t) {
  if (std::fabs(t) < 1e-6) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}

double eval_S(const KernelSpec& spec, const Point& x, const Point& y) {
  return std::visit(
      overloaded{[&](const Sinc1D& k) { return k.sigma / std::numbers::pi * sinc(k.sigma * (y[0] - x[0])); },
                 [&](const QftSeparable2D& k) {
                   return sinc(k.sigma * (x[0] - y[0])) * sinc(k.sigma * (x[1] - y[1]));
                 },
                 [&](const Tabulated& t) {
                   const auto grid = gauss_legendre_grid(t.dim, t.tau, t.dim == 1 ? 64 : 32);
                   return quadrature_S(spec, grid, x, y).w;
                 }},
      spec);
}

Quaternion quadrature_S(const KernelSpec& spec, const QuadratureGrid& grid, const Point& x,
                        const Point& y) {
  Quaternion acc;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& w = grid.nodes[k];
    acc += grid.weights[k] * (eval_E(spec, w, y) * conj(eval_E(spec, w, x)));
  }
  return acc;
}

Quaternion quadrature_S_reversed(const KernelSpec& spec, const QuadratureGrid& grid,
                                 const Point& x, const Point& y) {
  Quaternion acc;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& w = grid.nodes[k];
    acc += grid.weights[k] * (conj(eval_E(spec, w, x)) * eval_E(spec, w, y));
  }
  return acc;
}

std::optional<double> lattice_spacing(const KernelSpec& spec) {
  const auto sigma = kernel_sigma(spec);
  if (!sigma) return std::nullopt;
  return std::numbers::pi / *sigma;
}

std::array<double, 2> x_range(const KernelSpec& spec, int axis) {
  if (const auto* t = std::get_if<Tabulated>(&spec)) {
    const auto& a = t->axes[static_cast<std::size_t>(t->dim + axis)];
    return {a.front(), a.back()};
  }
  const double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf};
}

AdmissibilityReport check_admissibility(const KernelSpec& spec, const QuadratureGrid& grid,
                                        std::size_t trials, std::uint64_t seed) {
  validate(spec);
  const int dim = kernel_dim(spec);
  const double tau = kernel_tau(spec);
  if (grid.dim != dim) throw std::invalid_argument("check_admissibility: grid dimension mismatch");
  std::mt19937_64 rng(seed);

  // Draws in D, and in the usable part of X (three domain widths for
  // built-ins, the tabulated range otherwise).
  const auto draw_d = [&] {
    Point p{0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[static_cast<std::size_t>(a)] = tau * uniform(rng);
    return p;
  };
  const auto draw_x = [&] {
    Point p{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      auto r = x_range(spec, a);
      if (!std::isfinite(r[0])) r = {-3.0 * tau, 3.0 * tau};
      p[static_cast<std::size_t>(a)] = 0.5 * (r[0] + r[1]) + 0.5 * (r[1] - r[0]) * uniform(rng);
    }
    return p;
  };

  double e_scale = 0.0;
  for (std::size_t t = 0; t < std::max<std::size_t>(trials, 1); ++t)
    e_scale = std::max(e_scale, norm(eval_E(spec, draw_d(), draw_x())));
  double measure = 0.0;
  for (double w : grid.weights) measure += w;
  const double s_scale = std::max(e_scale * e_scale * measure, 1e-300);

  AdmissibilityReport report;
  auto& sym = report.checks[0];
  sym.name = "condition-1 symmetry E(w,x)=E(x,w)";
  sym.tolerance = 1e-12 * std::max(e_scale, 1e-300);
  for (std::size_t t = 0; t < trials; ++t) {
    Point w = draw_d();
    Point x = draw_d();
    // Keep x inside the table for tabulated kernels (E(x, w) reads x as a w).
    for (int a = 0; a < dim; ++a) {
      const auto r = x_range(spec, a);
      auto& c = x[static_cast<std::size_t>(a)];
      c = std::clamp(c, std::max(r[0], -tau), std::min(r[1], tau));
      auto& d = w[static_cast<std::size_t>(a)];
      d = std::clamp(d, std::max(r[0], -tau), std::min(r[1], tau));
    }
    sym.worst = std::max(sym.worst, norm(eval_E(spec, w, x) - eval_E(spec, x, w)));
  }
  sym.passed = sym.worst <= sym.tolerance;

  auto& total = report.checks[1];
  total.name = "condition-2 totality (section Gram probe)";
  total.tolerance = 1e-10;
  {
    std::vector<Point> probes;
    if (const auto h = lattice_spacing(spec)) {
      const long half = static_cast<long>(std::clamp<std::size_t>(grid.n_per_axis / 16, 1, 4));
      for (long a = -half; a <= half; ++a) {
        if (dim == 1) {
          probes.push_back({*h * static_cast<double>(a), 0.0});
        } else {
          for (long b = -half; b <= half; ++b)
            probes.push_back({*h * static_cast<double>(a), *h * static_cast<double>(b)});
        }
      }
    } else {
      const auto& t = std::get<Tabulated>(spec);
      std::vector<std::vector<double>> picks(static_cast<std::size_t>(dim));
      for (int a = 0; a < dim; ++a) {
        const auto& axis = t.axes[static_cast<std::size_t>(dim + a)];
        // Up to five nodes spread over the whole range: closely spaced
        // sections are nearly dependent for any smooth kernel.
        const std::size_t count = std::min<std::size_t>(5, axis.size());
        for (std::size_t i = 0; i < count; ++i) {
          const std::size_t idx = count == 1 ? 0 : i * (axis.size() - 1) / (count - 1);
          picks[static_cast<std::size_t>(a)].push_back(axis[idx]);
        }
      }
      if (dim == 1) {
        for (double c : picks[0]) probes.push_back({c, 0.0});
      } else {
        for (double c1 : picks[0])
          for (double c2 : picks[1]) probes.push_back({c1, c2});
      }
    }
    std::vector<QVector> sections;
    for (const auto& x : probes) {
      QVector s(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) s[k] = std::sqrt(grid.weights[k]) * eval_E(spec, grid.nodes[k], x);
      sections.push_back(std::move(s));
    }
    QMatrix gram(sections.size(), sections.size());
    for (std::size_t a = 0; a < sections.size(); ++a)
      for (std::size_t b = 0; b < sections.size(); ++b) gram(a, b) = inner(sections[a], sections[b]);
    const auto d = eig_selfadjoint(gram);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& l : d.eigenvalues) {
      lo = std::min(lo, l.w);
      hi = std::max(hi, l.w);
    }
    total.worst = hi > 0.0 ? lo / hi : 0.0;
    total.passed = hi > 0.0 && total.worst >= total.tolerance;
    total.detail = std::to_string(probes.size()) + " sections; smallest/largest Gram eigenvalue";
  }

  auto& real = report.checks[2];
  real.name = "condition-3 real kernel Vec S(x,y)=0";
  real.tolerance = 1e-11 * s_scale;
  auto& comm = report.checks[3];
  comm.name = "condition-4 commutation of kernel product";
  comm.tolerance = 1e-11 * s_scale;
  for (std::size_t t = 0; t < trials; ++t) {
    const Point x = draw_x();
    const Point y = draw_x();
    const Quaternion s = quadrature_S(spec, grid, x, y);
    const Quaternion r = quadrature_S_reversed(spec, grid, x, y);
    real.worst = std::max(real.worst, norm(vector_part(s)));
    comm.worst = std::max(comm.worst, norm(s - r));
  }
  real.passed = real.worst <= real.tolerance;
  comm.passed = comm.worst <= comm.tolerance;
  return report;
}

Tabulated load_tabulated_csv(const std::string& path) {
  const auto csv = io::read_numeric_csv(path, {6, 8});
  const auto& rows = csv.rows;
  const auto& row_numbers = csv.line_numbers;
  const std::size_t width = csv.width;

  Tabulated t;
  t.dim = width == 6 ? 1 : 2;
  const std::size_t naxes = static_cast<std::size_t>(2 * t.dim);
  t.axes.assign(naxes, {});
  for (std::size_t a = 0; a < naxes; ++a) {
    auto& axis = t.axes[a];
    for (const auto& r : rows) axis.push_back(r[a]);
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  const std::size_t expected = table_size(t);
  if (expected != rows.size())
    throw InputError(path + ": rows do not form a full tensor grid (" + std::to_string(rows.size()) + " rows, " +
                     std::to_string(expected) + " grid points)");
  t.values.assign(expected, Quaternion{});
  std::vector<bool> seen(expected, false);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < naxes; ++a) {
      const auto& axis = t.axes[a];
      const auto idx = static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), rows[r][a]) - axis.begin());
      flat = flat * axis.size() + idx;
    }
    if (seen[flat]) throw InputError(path + ": row " + std::to_string(row_numbers[r]) + ": duplicate grid point");
    seen[flat] = true;
    const auto& v = rows[r];
    t.values[flat] = Quaternion(v[naxes], v[naxes + 1], v[naxes + 2], v[naxes + 3]);
  }
  double tau = 0.0;
  for (int a = 0; a < t.dim; ++a) {
    const auto& w = t.axes[static_cast<std::size_t>(a)];
    tau = std::max({tau, std::fabs(w.front()), std::fabs(w.back())});
  }
  t.tau = tau;
  try {
    validate(KernelSpec{t});
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  }
  return t;
}

}  // namespace qsample
