#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mball/christoffel.hpp"
#include "mball/config.hpp"
#include "mball/experiment.hpp"
#include "mball/geometry.hpp"
#include "mball/kernels.hpp"
#include "mball/markov.hpp"
#include "mball/polyspace.hpp"
#include "mball/weights.hpp"

namespace py = pybind11;
using namespace mball;

namespace {

Point to_point(const std::vector<double>& x) { return Point(std::span<const double>(x)); }

}  // namespace

PYBIND11_MODULE(_mball, m) {
  m.doc() = "Markov inequalities and Christoffel functions on the unit ball";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Weight>(m, "Weight")
      .def_static("jacobi", &Weight::jacobi, py::arg("mu"))
      .def_static("product", &Weight::product, py::arg("gammas"), py::arg("mu"))
      .def_static("radial_step", &Weight::radial_step, py::arg("a"), py::arg("c"))
      .def_static("parse", &Weight::parse)
      .def("total_mass", &Weight::total_mass, py::arg("dim"))
      .def("__call__", [](const Weight& w, const std::vector<double>& x) { return w.eval(to_point(x)); })
      .def("__str__", &Weight::to_string)
      .def("__repr__", [](const Weight& w) { return "Weight('" + w.to_string() + "')"; })
      .def(py::self == py::self);

  m.def("dist", [](const std::vector<double>& x, const std::vector<double>& y) { return dist(to_point(x), to_point(y)); });
  m.def("dist_tilde",
        [](const std::vector<double>& x, const std::vector<double>& y) { return dist_tilde(to_point(x), to_point(y)); });
  m.def("dim_pi", &dim_pi, py::arg("n"), py::arg("d"));

  py::class_<OrthoBasis>(m, "OrthoBasis")
      .def_readonly("degree", &OrthoBasis::degree)
      .def_readonly("dim", &OrthoBasis::dim)
      .def_readonly("coeffs", &OrthoBasis::coeffs)
      .def_readonly("gram_residual", &OrthoBasis::gram_residual)
      .def("__len__", &OrthoBasis::size)
      .def("eval", [](const OrthoBasis& b, const std::vector<double>& x) { return b.eval(to_point(x)); })
      .def("gradient", [](const OrthoBasis& b, const std::vector<double>& x) { return b.gradient(x); });
  m.def("orthonormal_basis", py::overload_cast<int, const Weight&, int>(&orthonormal_basis), py::arg("n"),
        py::arg("weight"), py::arg("dim") = 2);

  py::class_<WorstCaseResult>(m, "WorstCaseResult")
      .def_readonly("n", &WorstCaseResult::n)
      .def_readonly("p", &WorstCaseResult::p)
      .def_readonly("value", &WorstCaseResult::value)
      .def_property_readonly("method", [](const WorstCaseResult& r) { return std::string(to_string(r.method)); })
      .def_readonly("extremal", &WorstCaseResult::extremal);
  py::class_<TraceResult>(m, "TraceResult")
      .def_readonly("value", &TraceResult::value)
      .def_readonly("matrix_trace", &TraceResult::matrix_trace)
      .def_readonly("max_relative_gap", &TraceResult::max_relative_gap);
  py::class_<AverageCaseResult>(m, "AverageCaseResult")
      .def_readonly("mean", &AverageCaseResult::monte_carlo_mean)
      .def_readonly("stderr", &AverageCaseResult::monte_carlo_stderr)
      .def_readonly("sample_count", &AverageCaseResult::sample_count);
  py::class_<LiftedResult>(m, "LiftedResult")
      .def_readonly("value", &LiftedResult::value)
      .def_readonly("identity_constant", &LiftedResult::identity_constant);

  m.def(
      "worst_l2", [](int n, const Weight& w, int dim) { return worst_l2(markov_setup(n, w, dim)); }, py::arg("n"),
      py::arg("weight"), py::arg("dim") = 2);
  m.def(
      "worst_lp", [](int n, double p, const Weight& w, int dim) { return worst_lp(n, p, w, dim); }, py::arg("n"),
      py::arg("p"), py::arg("weight"), py::arg("dim") = 2);
  m.def(
      "trace_formula", [](int n, const Weight& w, int dim) { return trace_formula(markov_setup(n, w, dim)); },
      py::arg("n"), py::arg("weight"), py::arg("dim") = 2);
  m.def(
      "average_monte_carlo",
      [](int n, const Weight& w, int dim, double sigma, int samples, std::uint64_t seed, int threads) {
        return average_monte_carlo(markov_setup(n, w, dim), sigma, samples, seed, threads);
      },
      py::arg("n"), py::arg("weight"), py::arg("dim") = 2, py::arg("sigma") = 1.0, py::arg("samples") = 1000,
      py::arg("seed") = 1, py::arg("threads") = 1);
  m.def("worst_1d", &worst_1d, py::arg("n"), py::arg("p"), py::arg("lam"));
  m.def(
      "lifted_lower_bound", [](int n, double p, double mu, int d) { return lifted_lower_bound(n, p, mu, d); },
      py::arg("n"), py::arg("p"), py::arg("mu"), py::arg("dim") = 2);

  m.def(
      "christoffel_l2",
      [](int n, const Weight& w, const std::vector<double>& x) {
        return christoffel_l2(orthonormal_basis(n, w, static_cast<int>(x.size())), to_point(x));
      },
      py::arg("n"), py::arg("weight"), py::arg("x"));
  m.def(
      "christoffel_lp",
      [](int n, double p, const Weight& w, const std::vector<double>& x) {
        return christoffel_lp(n, p, w, to_point(x)).value;
      },
      py::arg("n"), py::arg("p"), py::arg("weight"), py::arg("x"));

  m.def("gegenbauer", &gegenbauer, py::arg("n"), py::arg("lam"), py::arg("t"));
  m.def("cutoff_eta", &cutoff_eta);
  m.def(
      "reproducing_kernel",
      [](int n, double mu, const std::vector<double>& x, const std::vector<double>& y) {
        return reproducing_kernel(n, mu, to_point(x), to_point(y)).value;
      },
      py::arg("n"), py::arg("mu"), py::arg("x"), py::arg("y"));
  m.def(
      "Ln_kernel",
      [](int n, double mu, const std::vector<double>& x, const std::vector<double>& y) {
        return Ln_kernel(n, mu, to_point(x), to_point(y)).value;
      },
      py::arg("n"), py::arg("mu"), py::arg("x"), py::arg("y"));

  m.def("parse_config", &parse_config);
  m.def("serialize_config", &serialize);
  m.def("config_hash", &config_hash_hex);
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_property_readonly("experiment", [](const ExperimentConfig& c) { return std::string(to_string(c.kind)); })
      .def_readonly("weight", &ExperimentConfig::weight)
      .def_readonly("n_values", &ExperimentConfig::n_values)
      .def_readonly("p", &ExperimentConfig::p)
      .def_readonly("seed", &ExperimentConfig::seed);

  py::class_<ExperimentRecord>(m, "ExperimentRecord")
      .def_readonly("hash", &ExperimentRecord::hash)
      .def_readonly("header", &ExperimentRecord::header)
      .def_readonly("rows", &ExperimentRecord::rows)
      .def_readonly("metrics", &ExperimentRecord::metrics)
      .def_property_readonly("passed", &ExperimentRecord::passed)
      .def("csv", &ExperimentRecord::csv)
      .def("summary_json", &ExperimentRecord::summary_json);
  m.def(
      "run",
      [](const ExperimentConfig& c, std::optional<std::uint64_t> seed, int threads) {
        RunOptions opt;
        opt.seed = seed;
        opt.threads = threads;
        py::gil_scoped_release release;
        return run(c, opt);
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 1);
}
