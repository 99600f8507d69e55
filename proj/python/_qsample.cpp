#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qsample/errors.hpp"
#include "qsample/io.hpp"
#include "qsample/kernels.hpp"
#include "qsample/nystrom.hpp"
#include "qsample/sampling.hpp"
#include "qsample/verify.hpp"

namespace py = pybind11;
using namespace qsample;

namespace {

// A float, or a sequence of one or two floats.
Point to_point(const py::handle& h) {
  if (py::isinstance<py::float_>(h) || py::isinstance<py::int_>(h)) return {h.cast<double>(), 0.0};
  const auto v = h.cast<std::vector<double>>();
  if (v.empty() || v.size() > 2) throw py::value_error("a point has one or two coordinates");
  return {v[0], v.size() == 2 ? v[1] : 0.0};
}

std::vector<Point> to_points(const py::handle& h) {
  std::vector<Point> out;
  for (const auto& item : h) out.push_back(to_point(item));
  return out;
}

py::array_t<double> quaternions(const std::vector<Quaternion>& qs) {
  py::array_t<double> a({static_cast<py::ssize_t>(qs.size()), py::ssize_t{4}});
  auto r = a.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    const auto& q = qs[static_cast<std::size_t>(i)];
    r(i, 0) = q.w;
    r(i, 1) = q.x;
    r(i, 2) = q.y;
    r(i, 3) = q.z;
  }
  return a;
}

py::array_t<double> points(const std::vector<Point>& ps, int dim) {
  py::array_t<double> a({static_cast<py::ssize_t>(ps.size()), static_cast<py::ssize_t>(dim)});
  auto r = a.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    for (py::ssize_t d = 0; d < dim; ++d) r(i, d) = ps[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
  return a;
}

py::array_t<double> doubles(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

}  // namespace

PYBIND11_MODULE(_qsample, m) {
  m.doc() = "Quaternion bandlimited kernels: spectra, sampling and verification";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<Quaternion>(m, "Quaternion")
      .def(py::init<>())
      .def(py::init([](double w, double x, double y, double z) { return Quaternion{w, x, y, z}; }), py::arg("w"),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def_readwrite("w", &Quaternion::w)
      .def_readwrite("x", &Quaternion::x)
      .def_readwrite("y", &Quaternion::y)
      .def_readwrite("z", &Quaternion::z)
      .def("conj", [](const Quaternion& q) { return conj(q); })
      .def("norm", [](const Quaternion& q) { return norm(q); })
      .def("inverse", [](const Quaternion& q) { return inverse(q); })
      .def("__add__", [](const Quaternion& a, const Quaternion& b) { return a + b; })
      .def("__sub__", [](const Quaternion& a, const Quaternion& b) { return a - b; })
      .def("__mul__", [](const Quaternion& a, const Quaternion& b) { return a * b; })
      .def("__mul__", [](const Quaternion& a, double s) { return a * s; })
      .def("__rmul__", [](const Quaternion& a, double s) { return s * a; })
      .def("__neg__", [](const Quaternion& a) { return -a; })
      .def("__iter__", [](const Quaternion& q) { return py::iter(py::make_tuple(q.w, q.x, q.y, q.z)); })
      .def("__repr__", [](const Quaternion& q) {
        std::ostringstream os;
        os.precision(17);
        os << "Quaternion(" << q.w << ", " << q.x << ", " << q.y << ", " << q.z << ")";
        return os.str();
      });

  py::class_<Sinc1D>(m, "Sinc1D")
      .def(py::init([](double sigma, double tau) { return Sinc1D{sigma, tau}; }), py::arg("sigma"),
           py::arg("tau") = 1.0)
      .def_readonly("sigma", &Sinc1D::sigma)
      .def_readonly("tau", &Sinc1D::tau);
  py::class_<QftSeparable2D>(m, "QftSeparable2D")
      .def(py::init([](double sigma, double tau) { return QftSeparable2D{sigma, tau}; }), py::arg("sigma"),
           py::arg("tau") = 1.0)
      .def_readonly("sigma", &QftSeparable2D::sigma)
      .def_readonly("tau", &QftSeparable2D::tau);
  py::class_<Tabulated>(m, "Tabulated")
      .def_readonly("dim", &Tabulated::dim)
      .def_readonly("tau", &Tabulated::tau);
  m.def("load_tabulated_csv", &load_tabulated_csv, py::arg("path"));

  m.def("kernel_name", &kernel_name);
  m.def("kernel_dim", &kernel_dim);
  m.def(
      "eval_E", [](const KernelSpec& s, const py::object& w, const py::object& x) {
        return eval_E(s, to_point(w), to_point(x));
      },
      py::arg("kernel"), py::arg("w"), py::arg("x"));
  m.def(
      "eval_S", [](const KernelSpec& s, const py::object& x, const py::object& y) {
        return eval_S(s, to_point(x), to_point(y));
      },
      py::arg("kernel"), py::arg("x"), py::arg("y"));

  py::class_<QuadratureGrid>(m, "QuadratureGrid")
      .def_readonly("dim", &QuadratureGrid::dim)
      .def_readonly("tau", &QuadratureGrid::tau)
      .def_readonly("n_per_axis", &QuadratureGrid::n_per_axis)
      .def_property_readonly("nodes", [](const QuadratureGrid& g) { return points(g.nodes, g.dim); })
      .def_property_readonly("weights", [](const QuadratureGrid& g) { return doubles(g.weights); })
      .def("__len__", &QuadratureGrid::size);
  m.def("gauss_legendre_grid", &gauss_legendre_grid, py::arg("dim"), py::arg("tau"), py::arg("n_per_axis"));

  m.def(
      "check_admissibility",
      [](const KernelSpec& s, const QuadratureGrid& g, std::size_t trials, std::uint64_t seed) {
        py::list out;
        for (const auto& c : check_admissibility(s, g, trials, seed).checks) {
          out.append(py::dict(py::arg("name") = c.name, py::arg("measured") = c.worst,
                              py::arg("tolerance") = c.tolerance, py::arg("passed") = c.passed));
        }
        return out;
      },
      py::arg("kernel"), py::arg("grid"), py::arg("trials") = 20, py::arg("seed") = 1);

  py::class_<NystromOperator>(m, "NystromOperator")
      .def_readonly("grid", &NystromOperator::grid)
      .def_property_readonly("kernel", [](const NystromOperator& op) { return op.spec; });
  m.def(
      "build",
      [](const KernelSpec& s, const QuadratureGrid& g, bool check) {
        return build(s, g, {.check_admissibility = check});
      },
      py::arg("kernel"), py::arg("grid"), py::arg("check_admissibility") = true);
  m.def("normality_defect", &normality_defect);
  m.def("kernel_trace", &kernel_trace);

  py::class_<PsqwsBasis>(m, "PsqwsBasis")
      .def_readonly("grid", &PsqwsBasis::grid)
      .def_readonly("retention_floor", &PsqwsBasis::retention_floor)
      .def_property_readonly("count", &PsqwsBasis::count)
      .def_property_readonly("mu", [](const PsqwsBasis& b) { return doubles(b.mu); })
      .def_property_readonly("all_mu", [](const PsqwsBasis& b) { return doubles(b.all_mu); })
      .def_property_readonly("eigenvalues", [](const PsqwsBasis& b) { return quaternions(b.lambda); })
      .def(
          "phi_nodes",
          [](const PsqwsBasis& b, std::size_t n) {
            if (n >= b.count()) throw py::index_error("mode index out of range");
            std::vector<Quaternion> v(b.grid.size());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = b.phi_at_node(n, k);
            return quaternions(v);
          },
          py::arg("n"), "phi_n at every grid node, shape (nodes, 4)")
      .def(
          "extend", [](const PsqwsBasis& b, std::size_t n, const py::object& x) { return extend(b, n, to_point(x)); },
          py::arg("n"), py::arg("x"))
      .def(
          "extend_all",
          [](const PsqwsBasis& b, const py::object& x, std::optional<std::size_t> modes) {
            return quaternions(extend_all(b, to_point(x), modes.value_or(b.count())));
          },
          py::arg("x"), py::arg("modes") = py::none())
      .def("spectrum_json", [](const PsqwsBasis& b, double trace) { return io::spectrum_json(b, trace); });
  m.def("eigensystem", [](const NystromOperator& op, double floor) { return eigensystem(op, floor); }, py::arg("op"),
        py::arg("retention_floor") = 1e-12);
  m.def("tensor_eigensystem", &tensor_eigensystem, py::arg("kernel"), py::arg("basis1d"),
        py::arg("retention_floor") = 1e-12);

  py::class_<BandlimitedSignal>(m, "BandlimitedSignal")
      .def_readonly("grid", &BandlimitedSignal::grid)
      .def("__call__", [](const BandlimitedSignal& f, const py::object& x) { return eval(f, to_point(x)); });
  m.def(
      "synth",
      [](const KernelSpec& s, const QuadratureGrid& g, std::uint64_t seed, const std::string& shape) {
        if (shape != "white" && shape != "smooth") throw py::value_error("shape must be 'white' or 'smooth'");
        return synth(s, g, seed, shape == "white" ? SignalShape::white : SignalShape::smooth);
      },
      py::arg("kernel"), py::arg("grid"), py::arg("seed"), py::arg("shape") = "white");
  m.def(
      "mode_signal",
      [](const PsqwsBasis& b, std::size_t n) {
        if (n >= b.count()) throw py::index_error("mode index out of range");
        return make_signal(b.spec, b.grid, b.Phi[n]);
      },
      py::arg("basis"), py::arg("n"), "The signal whose transform coefficients are Phi_n.");

  py::class_<SampledSignal>(m, "SampledSignal")
      .def_readonly("dim", &SampledSignal::dim)
      .def_property_readonly("points", [](const SampledSignal& s) { return points(s.points, s.dim); })
      .def_property_readonly("values", [](const SampledSignal& s) { return quaternions(s.values); })
      .def("__len__", [](const SampledSignal& s) { return s.points.size(); });
  m.def("sample_lattice", &sample_lattice, py::arg("signal"), py::arg("n_max"));
  m.def(
      "reconstruct_wsk",
      [](const SampledSignal& s, const KernelSpec& k, const py::object& xs) {
        std::vector<Quaternion> out;
        for (const auto& x : to_points(xs)) out.push_back(reconstruct_wsk(s, k, x));
        return quaternions(out);
      },
      py::arg("samples"), py::arg("kernel"), py::arg("points"));
  m.def(
      "reconstruct_psqws",
      [](const SampledSignal& s, const PsqwsBasis& b, const py::object& xs, std::optional<std::size_t> modes) {
        return quaternions(reconstruct_psqws(s, b, to_points(xs), modes.value_or(b.count())));
      },
      py::arg("samples"), py::arg("basis"), py::arg("points"), py::arg("modes") = py::none());
  m.def(
      "concentration_ratio",
      [](const BandlimitedSignal& f, const PsqwsBasis& b) {
        const auto c = concentration_ratio(f, b);
        return py::dict(py::arg("coefficient") = c.coefficient, py::arg("quadrature") = c.quadrature,
                        py::arg("h_norm2") = c.h_norm2);
      },
      py::arg("signal"), py::arg("basis"));

  m.def(
      "verify",
      [](std::optional<KernelSpec> spec, std::size_t nodes, std::uint64_t seed, std::size_t trials, double floor,
         std::map<std::string, double> tolerances) {
        VerifyConfig cfg;
        if (spec) cfg.spec = *spec;
        cfg.nodes = nodes;
        cfg.seed = seed;
        cfg.trials = trials;
        cfg.retention_floor = floor;
        cfg.tolerance_overrides = std::move(tolerances);
        std::string json;
        {
          py::gil_scoped_release release;
          json = run_verify(cfg).to_json();
        }
        return py::module_::import("json").attr("loads")(json);
      },
      py::arg("kernel") = py::none(), py::arg("nodes") = 0, py::arg("seed") = 1, py::arg("trials") = 1000,
      py::arg("retention_floor") = 1e-12, py::arg("tolerances") = std::map<std::string, double>{},
      "Run the invariant suites; returns the report as a dict.");
}
