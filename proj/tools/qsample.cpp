// qsample: spectra, sampling and verification for quaternion-valued
// bandlimited kernels.
//
// Exit status: 0 success, 1 failed invariant, 2 usage or input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qsample/errors.hpp"
#include "qsample/io.hpp"
#include "qsample/kernels.hpp"
#include "qsample/nystrom.hpp"
#include "qsample/sampling.hpp"
#include "qsample/verify.hpp"

using namespace qsample;

namespace {

// Bad flags or flag combinations, reported with exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Args {
  std::string kernel;
  std::optional<double> sigma;
  double tau = 1.0;
  std::string table;
  std::size_t nodes = 0;
  std::uint64_t seed = 1;
  std::string out;
  double floor = 1e-12;
  std::vector<std::string> tol;

  std::string dump;
  std::size_t n_max = 16;
  std::string shape = "smooth";
  std::string in;
  std::string method;
  std::string eval_points;
  std::optional<std::size_t> modes;
  std::size_t trials = 1000;
  std::string report;
};

bool kernel_given(const Args& a) { return !a.kernel.empty() || !a.table.empty(); }

KernelSpec make_kernel(const Args& a) {
  std::string k = a.kernel;
  if (k.empty() && !a.table.empty()) k = "table";
  if (k.empty()) throw UsageError("--kernel is required (sinc1d, qft2d or table)");
  if (k == "table") {
    if (a.table.empty()) throw UsageError("--kernel table needs --table PATH");
    if (a.sigma) throw UsageError("--sigma does not apply to a tabulated kernel");
    return load_tabulated_csv(a.table);
  }
  if (!a.table.empty()) throw UsageError("--table only applies to --kernel table");
  if (!a.sigma) throw UsageError("--kernel " + k + " requires --sigma");
  if (k == "sinc1d") return Sinc1D{*a.sigma, a.tau};
  if (k == "qft2d") return QftSeparable2D{*a.sigma, a.tau};
  throw UsageError("unknown kernel '" + k + "' (expected sinc1d, qft2d or table)");
}

std::size_t default_nodes(const KernelSpec& spec) { return kernel_dim(spec) == 1 ? 64 : 24; }

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--tol expects NAME=VALUE, got '" + s + "'");
    const auto name = s.substr(0, eq);
    try {
      std::size_t used = 0;
      const double v = std::stod(s.substr(eq + 1), &used);
      if (used != s.size() - eq - 1) throw std::invalid_argument(s);
      out[name] = v;
    } catch (const std::exception&) {
      throw UsageError("--tol " + name + ": value is not a number");
    }
    const auto& t = default_tolerances();
    if (std::none_of(t.begin(), t.end(), [&](const ToleranceInfo& i) { return i.name == name; }))
      throw UsageError("--tol: unknown tolerance '" + name + "'");
  }
  return out;
}

double tolerance(const std::map<std::string, double>& overrides, const std::string& name) {
  if (const auto it = overrides.find(name); it != overrides.end()) return it->second;
  for (const auto& t : default_tolerances())
    if (t.name == name) return t.value;
  return 0.0;
}

// Data to --out, or to stdout with the human summary moved to stderr.
void emit(const Args& a, const std::string& content) {
  if (a.out.empty()) {
    std::cout << content;
  } else {
    io::write_atomic(a.out, content);
  }
}
std::ostream& info(const Args& a) { return a.out.empty() ? std::cerr : std::cout; }

PsqwsBasis reconstruction_basis(const KernelSpec& spec, const Args& a) {
  const double tau = kernel_tau(spec);
  const std::size_t n1 = a.nodes ? a.nodes : 64;
  if (const auto* q = std::get_if<QftSeparable2D>(&spec)) {
    // The direct 2D grid is too coarse to extend modes out to the lattice;
    // the tensor basis reuses a fine 1D grid.
    const auto b1 = eigensystem(build(Sinc1D{q->sigma, q->tau}, gauss_legendre_grid(1, tau, n1)), a.floor);
    return tensor_eigensystem(spec, b1, a.floor);
  }
  return eigensystem(build(spec, gauss_legendre_grid(kernel_dim(spec), tau, n1)), a.floor);
}

int cmd_eigensys(const Args& a) {
  const auto spec = make_kernel(a);
  const auto grid = gauss_legendre_grid(kernel_dim(spec), kernel_tau(spec), a.nodes ? a.nodes : default_nodes(spec));
  const auto op = build(spec, grid);
  const auto basis = eigensystem(op, a.floor);
  const double trace = kernel_trace(op);
  const double all = std::accumulate(basis.all_mu.begin(), basis.all_mu.end(), 0.0);
  emit(a, io::spectrum_json(basis, trace));
  if (!a.dump.empty()) io::write_atomic(a.dump, io::eigenfunctions_csv(basis));
  auto& os = info(a);
  os.precision(15);
  os << "mu_1 = " << basis.mu.front() << "\n"
     << "modes retained = " << basis.count() << " of " << basis.all_mu.size() << " (floor " << a.floor << ")\n"
     << "trace: sum mu = " << all << ", kernel diagonal = " << trace
     << ", relative residual = " << std::fabs(all - trace) / trace << "\n";
  return 0;
}

int cmd_sample(const Args& a) {
  const auto spec = make_kernel(a);
  if (!lattice_spacing(spec)) throw UsageError("sample: kernel '" + kernel_name(spec) + "' has no sampling lattice");
  SignalShape shape;
  if (a.shape == "smooth") {
    shape = SignalShape::smooth;
  } else if (a.shape == "white") {
    shape = SignalShape::white;
  } else {
    throw UsageError("--shape must be smooth or white");
  }
  if (!a.eval_points.empty() && a.report.empty())
    throw UsageError("sample: --eval-points needs --report PATH for the exact values");
  const auto grid = gauss_legendre_grid(kernel_dim(spec), kernel_tau(spec), a.nodes ? a.nodes : 64);
  const auto f = synth(spec, grid, a.seed, shape);
  const auto s = sample_lattice(f, a.n_max);
  emit(a, io::points_values_csv(s.dim, s.points, s.values));
  if (!a.eval_points.empty()) {
    // Exact values at the evaluation points, for comparison with reconstruct.
    const auto xs = io::read_points_csv(a.eval_points, s.dim);
    std::vector<Quaternion> v;
    for (const auto& x : xs) v.push_back(eval(f, x));
    io::write_atomic(a.report, io::points_values_csv(s.dim, xs, v));
  }
  info(a) << s.points.size() << " lattice samples, |n| <= " << a.n_max << "\n";
  return 0;
}

int cmd_reconstruct(const Args& a) {
  const auto spec = make_kernel(a);
  const auto h = lattice_spacing(spec);
  if (!h) throw UsageError("reconstruct: kernel '" + kernel_name(spec) + "' has no sampling lattice");
  if (a.method != "wsk" && a.method != "psqws") throw UsageError("--method must be wsk or psqws");
  const int dim = kernel_dim(spec);
  const auto s = io::read_samples_csv(a.in);
  if (s.dim != dim) {
    throw InputError(a.in + ": " + std::to_string(s.dim) + "D samples for a " + std::to_string(dim) + "D kernel");
  }
  for (std::size_t i = 0; i < s.points.size(); ++i)
    for (int d = 0; d < dim; ++d) {
      const double t = s.points[i][static_cast<std::size_t>(d)] / *h;
      if (std::fabs(t - std::round(t)) > 1e-9) {
        throw InputError(a.in + ": data row " + std::to_string(i + 1) + ", column " + std::to_string(d + 1) +
                         ": point is not on the sampling lattice (spacing " + io::fmt(*h) + ")");
      }
    }
  const auto xs = io::read_points_csv(a.eval_points, dim);

  std::vector<Quaternion> out;
  if (a.method == "wsk") {
    for (const auto& x : xs) out.push_back(reconstruct_wsk(s, spec, x));
  } else {
    const auto basis = reconstruction_basis(spec, a);
    const std::size_t modes = a.modes.value_or(basis.count());
    if (modes > basis.count()) {
      throw UsageError("--modes " + std::to_string(modes) + " exceeds the " + std::to_string(basis.count()) +
                       " retained modes");
    }
    out = reconstruct_psqws(s, basis, xs, modes);
  }
  emit(a, io::points_values_csv(dim, xs, out));
  info(a) << a.method << ": " << xs.size() << " points from " << s.points.size() << " samples\n";
  return 0;
}

int cmd_verify(const Args& a) {
  VerifyConfig cfg;
  if (kernel_given(a)) cfg.spec = make_kernel(a);
  cfg.nodes = a.nodes;
  cfg.seed = a.seed;
  cfg.retention_floor = a.floor;
  cfg.trials = a.trials;
  cfg.tolerance_overrides = parse_tolerances(a.tol);
  const auto rep = run_verify(cfg);
  if (!a.report.empty()) io::write_atomic(a.report, rep.to_json());

  for (const auto& i : rep.invariants) {
    std::printf("%s  %-44s %11.3e  <= %9.3e", i.passed ? "PASS" : "FAIL", i.name.c_str(), i.measured, i.tolerance);
    if (!i.passed && !i.detail.empty()) std::printf("  (%s)", i.detail.c_str());
    std::printf("\n");
  }
  for (const auto& [suite, why] : rep.skipped) std::printf("SKIP  %s: %s\n", suite.c_str(), why.c_str());
  std::size_t failed = 0;
  for (const auto& i : rep.invariants) failed += i.passed ? 0 : 1;
  if (failed) {
    std::printf("verify: %zu of %zu invariants failed\n", failed, rep.invariants.size());
    return 1;
  }
  std::printf("verify: all %zu invariants passed\n", rep.invariants.size());
  return 0;
}

int cmd_concentrate(const Args& a) {
  const auto spec = make_kernel(a);
  const auto tols = parse_tolerances(a.tol);
  const auto grid = gauss_legendre_grid(kernel_dim(spec), kernel_tau(spec), a.nodes ? a.nodes : default_nodes(spec));
  const auto op = build(spec, grid);
  const auto basis = eigensystem(op, a.floor);
  const double mu1 = basis.mu.front();

  const auto ext = concentration_ratio(make_signal(spec, grid, basis.Phi.front()), basis, op);
  const double ext_err = std::max(std::fabs(ext.coefficient / mu1 - 1.0), std::fabs(ext.quadrature / mu1 - 1.0));
  const bool ext_ok = ext_err <= tolerance(tols, "concentration.extremizer");

  double best = 0.0;
  for (std::size_t t = 0; t < a.trials; ++t) {
    const auto f = synth(spec, grid, a.seed + t, t % 2 ? SignalShape::white : SignalShape::smooth);
    best = std::max(best, concentration_ratio(f, basis, op).quadrature);
  }
  const double bound_tol = tolerance(tols, "concentration.bound");
  const bool bound_ok = best <= mu1 * (1.0 + bound_tol);

  std::printf("mu_1 = %.15g\n", mu1);
  std::printf("beta estimate (max over %zu signals) = %.15g  (%.6g of mu_1)\n", a.trials, best, best / mu1);
  std::printf("bound beta_f <= mu_1 (1 + %.1e): %s\n", bound_tol, bound_ok ? "PASS" : "FAIL");
  std::printf("extremizer beta(Phi_1) = %.15g, relative error %.3e: %s\n", ext.quadrature, ext_err,
              ext_ok ? "PASS" : "FAIL");
  if (!a.out.empty()) {
    nlohmann::ordered_json j;
    j["kernel"] = kernel_name(spec);
    j["mu_1"] = mu1;
    j["trials"] = a.trials;
    j["seed"] = a.seed;
    j["beta_estimate"] = best;
    j["bound_passed"] = bound_ok;
    j["extremizer_beta"] = {{"coefficient", ext.coefficient}, {"quadrature", ext.quadrature}};
    j["extremizer_passed"] = ext_ok;
    io::write_atomic(a.out, j.dump(2) + "\n");
  }
  return ext_ok && bound_ok ? 0 : 1;
}

int cmd_admissibility(const Args& a) {
  const auto spec = make_kernel(a);
  const auto grid = gauss_legendre_grid(kernel_dim(spec), kernel_tau(spec), a.nodes ? a.nodes : default_nodes(spec));
  const auto rep = check_admissibility(spec, grid, 20, a.seed);
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    const auto& c = rep.checks[i];
    const char* rel = i == 1 ? ">=" : "<=";
    std::printf("%s  %-45s %11.3e  %s %9.3e\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.worst, rel,
                c.tolerance);
    j.push_back({{"name", c.name}, {"measured", c.worst}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  }
  if (!a.out.empty()) io::write_atomic(a.out, j.dump(2) + "\n");
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quaternion bandlimited kernels: spectra, sampling and verification"};
  app.fallthrough();
  app.require_subcommand(1);
  Args a;

  const auto at_least_two = CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          if (std::stoll(s) >= 2) return {};
        } catch (const std::exception&) {
        }
        return "must be an integer of at least 2 (got " + s + ")";
      },
      "INT>=2");
  const auto positive = CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          const double v = std::stod(s);
          if (v > 0.0 && std::isfinite(v)) return {};
        } catch (const std::exception&) {
        }
        return "must be a positive number (got " + s + ")";
      },
      "POSITIVE");

  app.add_option("--kernel", a.kernel, "sinc1d, qft2d or table");
  app.add_option("--sigma", a.sigma, "bandwidth of a built-in kernel")->check(positive);
  app.add_option("--tau", a.tau, "half-width of the domain D (default 1)")->check(positive);
  app.add_option("--table", a.table, "CSV of E values: w1[,w2],x1[,x2],w,x,y,z");
  app.add_option("--nodes", a.nodes, "Gauss-Legendre nodes per axis")->check(at_least_two);
  app.add_option("--seed", a.seed, "random seed (default 1)");
  app.add_option("--out", a.out, "output file (default: stdout)");
  app.add_option("--floor", a.floor, "retention floor relative to mu_1 (default 1e-12)")->check(CLI::Range(0.0, 1.0));
  app.add_option("--tol", a.tol, "tolerance override NAME=VALUE (repeatable)");

  auto* eig = app.add_subcommand("eigensys", "sorted spectrum as JSON");
  eig->add_option("--dump-eigenfunctions", a.dump, "CSV of phi_n at every grid node");

  auto* sample = app.add_subcommand("sample", "lattice samples of a seeded random bandlimited signal");
  sample->add_option("--n-max", a.n_max, "lattice indices |n| <= N (default 16)");
  sample->add_option("--shape", a.shape, "smooth or white (default smooth)");
  sample->add_option("--eval-points", a.eval_points, "points at which to also write exact values");
  sample->add_option("--report", a.report, "CSV of exact values at --eval-points");

  auto* rec = app.add_subcommand("reconstruct", "reconstruct a signal from lattice samples");
  rec->add_option("--in", a.in, "samples CSV: x1[,x2],w,x,y,z")->required();
  rec->add_option("--method", a.method, "wsk or psqws")->required();
  rec->add_option("--eval-points", a.eval_points, "CSV of x1[,x2]")->required();
  rec->add_option("--modes", a.modes, "psqws modes to use (default all retained)");

  auto* ver = app.add_subcommand("verify", "run the invariant suites");
  ver->add_option("--report", a.report, "JSON report");
  ver->add_option("--trials", a.trials, "random signals in the concentration suite (default 1000)")
      ->check(CLI::PositiveNumber);

  auto* con = app.add_subcommand("concentrate", "energy concentration bound and extremizer");
  con->add_option("--trials", a.trials, "random signals (default 1000)")->check(CLI::PositiveNumber);

  auto* adm = app.add_subcommand("admissibility", "check the four kernel conditions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "qsample: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*eig) return cmd_eigensys(a);
    if (*sample) return cmd_sample(a);
    if (*rec) return cmd_reconstruct(a);
    if (*ver) return cmd_verify(a);
    if (*con) return cmd_concentrate(a);
    if (*adm) return cmd_admissibility(a);
  } catch (const UsageError& e) {
    std::cerr << "qsample: usage: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "qsample: input: " << e.what() << "\n";
    return 2;
  } catch (const AdmissibilityError& e) {
    std::cerr << "qsample: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qsample: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qsample: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
