#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "chfam/experiment.hpp"

namespace py = pybind11;
using namespace chfam;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Field to_field(const Grid& grid, const Array& a) {
  if (a.ndim() != 1 || a.shape(0) != grid.size())
    throw InvalidArgument("expected a 1-D array of length " + std::to_string(grid.size()));
  return Field(grid, std::vector<double>(a.data(), a.data() + a.shape(0)));
}

Array to_array(const Field& f) {
  Array out(f.size());
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

template <Field (*Op)(const Field&)>
Array unary(const Grid& g, const Array& u) {
  return to_array(Op(to_field(g, u)));
}

DynamicsOptions dyn(const std::string& rule) { return DynamicsOptions{parse_dealias_rule(rule)}; }

py::dict tail_dict(const TailFit& f) {
  py::dict d;
  d["x_lo"] = f.x_lo;
  d["x_hi"] = f.x_hi;
  d["exponent"] = f.exponent;
  d["intercept"] = f.intercept;
  d["residual"] = f.residual;
  d["side"] = std::string(to_string(f.side));
  d["nodes_used"] = f.nodes_used;
  return d;
}

TailSide parse_side(const std::string& s) {
  if (s == "right") return TailSide::right;
  if (s == "left") return TailSide::left;
  throw InvalidArgument("side must be 'right' or 'left'");
}

py::object run_text(const std::string& text, bool write) {
  const ExperimentConfig cfg = parse_config(text);
  RunResult r;
  {
    py::gil_scoped_release release;
    r = run(cfg);
    if (write) emit_outputs(r);
  }
  py::dict out = py::module_::import("json").attr("loads")(result_json(r));
  out["exit_code"] = r.exit_code();
  return std::move(out);
}

}  // namespace

PYBIND11_MODULE(_chfam, m) {
  m.doc() = "Pseudospectral solver and diagnostics for the generalized Camassa-Holm family";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonFiniteError>(m, "NonFiniteError", error.ptr());
  py::register_exception<BoundaryDecayError>(m, "BoundaryDecayError", error.ptr());
  py::register_exception<InsufficientData>(m, "InsufficientData", error.ptr());
  py::register_exception<BlowUp>(m, "BlowUp", error.ptr());

  m.def("version", [] { return std::string(version()); });

  py::class_<Grid>(m, "Grid")
      .def(py::init(&make_grid), py::arg("num_points"), py::arg("half_length"))
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("half_length", &Grid::half_length)
      .def_property_readonly("spacing", &Grid::spacing)
      .def_property_readonly("nodes", [](const Grid& g) { return to_array(g.nodes()); })
      .def_property_readonly("wavenumbers", [](const Grid& g) { return to_array(g.wavenumbers()); })
      .def("__len__", &Grid::size)
      .def("__repr__", [](const Grid& g) {
        return "Grid(" + std::to_string(g.size()) + ", " + format_double(g.half_length()) + ")";
      });

  m.def("derivative", &unary<spectral_derivative>, py::arg("grid"), py::arg("u"));
  m.def("second_derivative", &unary<spectral_second_derivative>, py::arg("grid"), py::arg("u"));
  m.def("helmholtz", &unary<helmholtz>, py::arg("grid"), py::arg("u"));
  m.def("helmholtz_inverse", &unary<helmholtz_inverse>, py::arg("grid"), py::arg("u"));
  m.def("dx_helmholtz_inverse", &unary<dx_helmholtz_inverse>, py::arg("grid"), py::arg("u"));
  m.def("reflect_negate", &unary<reflect_negate>, py::arg("grid"), py::arg("u"));
  m.def(
      "dealias",
      [](const Grid& g, const Array& u, const std::string& rule, int n) {
        return to_array(dealias(to_field(g, u), Dealias{parse_dealias_rule(rule), n}));
      },
      py::arg("grid"), py::arg("u"), py::arg("rule") = "two_thirds", py::arg("n") = 1);
  m.def(
      "green_convolve",
      [](const Grid& g, const Array& u, const std::string& kernel) {
        if (kernel != "g" && kernel != "dx_g") throw InvalidArgument("kernel must be 'g' or 'dx_g'");
        return to_array(green_convolve(to_field(g, u), kernel == "g" ? GreenKernel::g : GreenKernel::dx_g));
      },
      py::arg("grid"), py::arg("u"), py::arg("kernel") = "g");
  m.def("quadrature", [](const Grid& g, const Array& u) { return quadrature(to_field(g, u)); }, py::arg("grid"),
        py::arg("u"));

  m.def(
      "flux_source",
      [](const Grid& g, const Array& u, int n, const std::string& rule) {
        return to_array(compute_f(to_field(g, u), ModelParams{n}, dyn(rule)));
      },
      py::arg("grid"), py::arg("u"), py::arg("n"), py::arg("dealias") = "two_thirds");
  m.def("nonlocal_flux", &unary<compute_F>, py::arg("grid"), py::arg("f"));
  m.def(
      "rhs",
      [](const Grid& g, const Array& u, int n, const std::string& rule) {
        return to_array(rhs(to_field(g, u), ModelParams{n}, dyn(rule)));
      },
      py::arg("grid"), py::arg("u"), py::arg("n"), py::arg("dealias") = "two_thirds");

  m.def(
      "evolve",
      [](const Grid& g, const Array& u0, int n, double t_end, double output_interval, double cfl, double dt_max,
         const std::string& rule, std::optional<double> fixed_dt) {
        StepControl ctl;
        ctl.t_end = t_end;
        ctl.cfl = cfl;
        ctl.dt_max = dt_max;
        EvolveOptions eo{output_interval, fixed_dt};
        std::vector<double> times;
        std::vector<Field> states;
        SolverState s{0.0, to_field(g, u0), ModelParams{n}, 0.0, 0};
        const DynamicsOptions d = dyn(rule);
        {
          py::gil_scoped_release release;
          evolve(
              s, ctl,
              [&](const SolverState& st) {
                times.push_back(st.time);
                states.push_back(st.u);
              },
              eo, d);
        }
        py::array_t<double> out({static_cast<py::ssize_t>(states.size()), static_cast<py::ssize_t>(g.size())});
        auto w = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < states.size(); ++k)
          for (int i = 0; i < g.size(); ++i) w(static_cast<py::ssize_t>(k), i) = states[k][i];
        return py::make_tuple(to_array(times), out);
      },
      py::arg("grid"), py::arg("u0"), py::arg("n"), py::arg("t_end"), py::arg("output_interval") = 0.0,
      py::arg("cfl") = 0.5, py::arg("dt_max") = 1e-2, py::arg("dealias") = "strict",
      py::arg("fixed_dt") = py::none());

  m.def(
      "sample_profile",
      [](const Grid& g, const std::string& kind, int n, double amplitude, double theta, double center, double sigma,
         double width, std::pair<double, double> support, bool one_sided, const std::string& expression) {
        ProfileSpec p;
        p.kind = parse_profile_kind(kind);
        p.amplitude = amplitude;
        p.theta = theta;
        p.center = center;
        p.sigma = sigma;
        p.width = width;
        p.support_lo = support.first;
        p.support_hi = support.second;
        p.one_sided = one_sided;
        p.expression = expression;
        return to_array(sample_profile(p, g, n));
      },
      py::arg("grid"), py::arg("kind"), py::arg("n") = 1, py::arg("amplitude") = 1.0, py::arg("theta") = 0.5,
      py::arg("center") = 0.0, py::arg("sigma") = 0.0, py::arg("width") = 1.0,
      py::arg("support") = std::pair{-1.0, 1.0}, py::arg("one_sided") = false, py::arg("expression") = "");
  m.def("random_smooth_field",
        [](const Grid& g, std::uint64_t seed, int index) { return to_array(random_smooth_field(g, seed, index)); },
        py::arg("grid"), py::arg("seed"), py::arg("index"));

  m.def("conserved_H1", [](const Grid& g, const Array& u) { return conserved_H1(to_field(g, u)); }, py::arg("grid"),
        py::arg("u"));
  m.def("conserved_H", [](const Grid& g, const Array& u) { return conserved_H(to_field(g, u)); }, py::arg("grid"),
        py::arg("u"));
  m.def("lp_norm", [](const Grid& g, const Array& u, double p) { return lp_norm(to_field(g, u), p); },
        py::arg("grid"), py::arg("u"), py::arg("p"));
  m.def(
      "fit_tail",
      [](const Grid& g, const Array& u, double x_lo, double x_hi, const std::string& side) {
        return tail_dict(fit_tail(to_field(g, u), x_lo, x_hi, parse_side(side)));
      },
      py::arg("grid"), py::arg("u"), py::arg("x_lo"), py::arg("x_hi"), py::arg("side") = "right");
  m.def("support_mass",
        [](const Grid& g, const Array& u, double a, double b) { return support_mass(to_field(g, u), a, b); },
        py::arg("grid"), py::arg("u"), py::arg("a"), py::arg("b"));
  m.def("s_kernel", &s_kernel, py::arg("a"), py::arg("b"), py::arg("y"));
  m.def(
      "kernel_identity",
      [](const Grid& g, const Array& u, int n, double a, double b, const std::string& rule) {
        const KernelIdentityCheck k = kernel_identity(to_field(g, u), ModelParams{n}, a, b, dyn(rule));
        py::dict d;
        d["lhs"] = k.lhs;
        d["rhs"] = k.rhs;
        d["residual"] = k.residual;
        d["relative"] = k.relative();
        return d;
      },
      py::arg("grid"), py::arg("u"), py::arg("n"), py::arg("a"), py::arg("b"), py::arg("dealias") = "two_thirds");
  m.def(
      "weight_convolution_identity",
      [](double theta, int N) { return weight_convolution_identity(theta, N, Grid(64, N + 60.0)); },
      py::arg("theta"), py::arg("N") = 200);
  m.def("weight_convolution_bound", &weight_convolution_bound, py::arg("theta"));

  m.def("run_config_text", &run_text, py::arg("text"), py::arg("write_outputs") = false,
        "Runs an experiment described in the config format; returns the result record as a dict.");
  m.def("render_config", [](const std::string& text) { return render_config(parse_config(text)); }, py::arg("text"));
}
