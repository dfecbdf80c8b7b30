#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "stripes/decomposition.hpp"
#include "stripes/energy.hpp"
#include "stripes/errors.hpp"
#include "stripes/flow.hpp"
#include "stripes/io.hpp"
#include "stripes/kernel.hpp"
#include "stripes/onedim.hpp"

namespace py = pybind11;
using namespace stripes;

namespace {

py::object to_python(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PeriodicField to_field(const Array& a, double L) {
  const int dims = static_cast<int>(a.ndim());
  if (dims < 1 || dims > 3) throw ParameterError("field must have 1, 2 or 3 dimensions");
  const auto n = a.shape(0);
  for (int i = 1; i < dims; ++i) {
    if (a.shape(i) != n) throw GridMismatchError("field must have equal extent along every axis");
  }
  std::vector<double> v(a.data(), a.data() + a.size());
  return PeriodicField(dims, static_cast<int>(n), L, std::move(v));
}

Array to_array(const PeriodicField& u) {
  std::vector<py::ssize_t> shape(u.dims(), u.n());
  Array out(shape);
  std::copy(u.values().begin(), u.values().end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict profile_dict(const ReflectedProfile& p) {
  py::dict d;
  d["h"] = p.h;
  d["g"] = to_array(p.g);
  d["gamma"] = to_array(p.gamma);
  return d;
}

}  // namespace

PYBIND11_MODULE(_stripeslab, m) {
  m.doc() = "Diffuse-interface stripe lab";

  py::register_exception<Error>(m, "StripesError", PyExc_ValueError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](int d, double p, double tau, double eps, double L, bool low, bool large) {
             return ModelParams::make(d, p, tau, eps, L, RegimeOverrides{low, large});
           }),
           py::arg("d") = 1, py::arg("p") = 3.0, py::arg("tau") = 0.05, py::arg("eps") = 0.05,
           py::arg("L") = 1.0, py::arg("allow_low_exponent") = false, py::arg("allow_large_tau") = false)
      .def_readonly("d", &ModelParams::d)
      .def_readonly("p", &ModelParams::p)
      .def_readonly("tau", &ModelParams::tau)
      .def_readonly("eps", &ModelParams::eps)
      .def_readonly("L", &ModelParams::L)
      .def_readonly("beta", &ModelParams::beta)
      .def_readonly("q", &ModelParams::q)
      .def_readonly("alpha", &ModelParams::alpha)
      .def_readonly("kernel_shift", &ModelParams::kernel_shift)
      .def_readonly("Jc", &ModelParams::Jc)
      .def("to_dict", [](const ModelParams& p) { return to_python(json(p)); })
      .def("__repr__", [](const ModelParams& p) { return "ModelParams(" + json(p).dump() + ")"; });

  m.def("double_well", &double_well);
  m.def("transition_energy", &transition_energy);
  m.def("omega_gap_ratio", &omega_gap_ratio);
  m.def("c_tau", &c_tau);
  m.def("j_c", py::overload_cast<int, double>(&j_c), py::arg("d"), py::arg("p"));
  m.def("kernel_moments", [](const ModelParams& p) { return to_python(to_json_value(kernel_moments(p))); });

  m.def("total_energy",
        [](const Array& u, double L, const ModelParams& p0) {
          const ModelParams p = p0.with_period(L);
          return to_python(to_json_value(total_energy(to_field(u, L), p)));
        },
        py::arg("u"), py::arg("L"), py::arg("params"));
  m.def("energy_gradient",
        [](const Array& u, double L, const ModelParams& p0, double kappa) {
          const ModelParams p = p0.with_period(L);
          const PeriodicField f = to_field(u, L);
          const auto g = energy_gradient(f, p, kappa);
          Array out(std::vector<py::ssize_t>(f.dims(), f.n()));
          std::copy(g.begin(), g.end(), out.mutable_data());
          return out;
        },
        py::arg("u"), py::arg("L"), py::arg("params"), py::arg("kappa") = 1e-3);
  m.def("lower_bound_report",
        [](const Array& u, double L, const ModelParams& p0) {
          const ModelParams p = p0.with_period(L);
          return to_python(to_json_value(lower_bound_report(to_field(u, L), p)));
        },
        py::arg("u"), py::arg("L"), py::arg("params"));

  m.def("sharp_stripe_energy", &sharp_stripe_energy, py::arg("h"), py::arg("params"));
  m.def("minimize_profile",
        [](const ModelParams& p, double h, int n, int max_iter) {
          MinimizeOptions o;
          o.max_iter = max_iter;
          MinimizeResult r;
          {
            py::gil_scoped_release release;
            r = minimize_profile(p, h, n, o);
          }
          py::dict d = profile_dict(r.profile);
          d["energy"] = r.energy;
          d["iterations"] = r.iterations;
          d["converged"] = r.converged;
          d["residual"] = r.residual;
          return d;
        },
        py::arg("params"), py::arg("h"), py::arg("n") = 512, py::arg("max_iter") = 200000);
  m.def("optimal_period",
        [](const ModelParams& p, int n, double h_lo, double h_hi, double rel_tol) {
          PeriodSearchOptions o;
          o.n = n;
          o.h_lo = h_lo;
          o.h_hi = h_hi;
          o.rel_tol = rel_tol;
          PeriodSearchResult r;
          {
            py::gil_scoped_release release;
            r = optimal_period(p, o);
          }
          py::dict d = to_python(to_json_value(r));
          d["profile"] = profile_dict(r.best.profile);
          return d;
        },
        py::arg("params"), py::arg("n") = 512, py::arg("h_lo") = 0.0, py::arg("h_hi") = 0.0,
        py::arg("rel_tol") = 1e-3);
  m.def("sorting_defect",
        [](double h, std::vector<double> g) { return sorting_defect(reflect_periodic(h, std::move(g))); },
        py::arg("h"), py::arg("g"));

  m.def("noise_field",
        [](int dims, int n, double L, std::uint64_t seed, double amplitude) {
          return to_array(noise_field(dims, n, L, seed, amplitude));
        },
        py::arg("dims"), py::arg("n"), py::arg("L"), py::arg("seed"), py::arg("amplitude") = 0.5);
  m.def("gradient_flow",
        [](const Array& u, double L, const ModelParams& p0, int max_iter, double kappa) {
          const ModelParams p = p0.with_period(L);
          FlowOptions o;
          o.max_iter = max_iter;
          o.kappa = kappa;
          const PeriodicField f = to_field(u, L);
          FlowResult r;
          {
            py::gil_scoped_release release;
            r = gradient_flow(f, p, o);
          }
          py::dict d;
          d["u"] = to_array(r.u);
          d["initial_energy"] = r.initial_energy;
          d["energy"] = r.energy;
          d["iterations"] = r.iterations;
          d["converged"] = r.converged;
          std::vector<double> trace;
          for (const auto& row : r.trace) trace.push_back(row.energy);
          d["trace"] = to_array(trace);
          return d;
        },
        py::arg("u"), py::arg("L"), py::arg("params"), py::arg("max_iter") = 20000, py::arg("kappa") = 1e-3);
  m.def("stripe_metrics",
        [](const Array& u, double L, const ModelParams& p0) {
          const ModelParams p = p0.with_period(L);
          const PeriodicField f = to_field(u, L);
          return to_python(to_json_value(
              stripe_metrics(f, p, default_h_grid(f.n(), L), default_nu_grid(f.n(), L))));
        },
        py::arg("u"), py::arg("L"), py::arg("params"));
}
