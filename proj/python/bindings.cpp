#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "klprox/analysis.hpp"
#include "klprox/harness.hpp"

namespace py = pybind11;
using namespace klprox;

namespace {

ExperimentSpec make_spec(const std::string& problem, const std::string& solver,
                         const std::map<std::string, double>& params,
                         const SolverConfig& config, const PgConfig& pg,
                         const std::string& output_path,
                         const std::string& data_path) {
  ExperimentSpec spec;
  spec.problem = problem_from_string(problem);
  spec.solver = solver_from_string(solver);
  spec.params = params;
  spec.config = config;
  spec.pg = pg;
  spec.output_path = output_path;
  spec.data_path = data_path;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Inexact proximal Newton method with q-order regularization, a "
      "proximal-gradient baseline, and an H1-H2 framework verifier.";

  py::register_exception<TooShortError>(m, "TooShortError");
  py::register_exception<ThetaOutOfRegime>(m, "ThetaOutOfRegime");
  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<EmptyFileError>(m, "EmptyFileError");

  // ---- models ----
  py::class_<CompositeObjective>(m, "CompositeObjective")
      .def("value", &CompositeObjective::value, py::arg("x"))
      .def(
          "smooth_value",
          [](const CompositeObjective& o, const Vector& x) {
            return o.smooth.value(x);
          },
          py::arg("x"))
      .def(
          "gradient",
          [](const CompositeObjective& o, const Vector& x) {
            return o.smooth.gradient(x);
          },
          py::arg("x"))
      .def(
          "hess_vec",
          [](const CompositeObjective& o, const Vector& x, const Vector& v) {
            return o.smooth.hess_vec(x, v);
          },
          py::arg("x"), py::arg("v"))
      .def(
          "regularizer_value",
          [](const CompositeObjective& o, const Vector& x) {
            return o.regularizer.value(x);
          },
          py::arg("x"))
      .def(
          "prox",
          [](const CompositeObjective& o, double t, const Vector& z) {
            return o.regularizer.prox(t, z);
          },
          py::arg("t"), py::arg("z"))
      .def_property_readonly(
          "dim", [](const CompositeObjective& o) { return o.smooth.dim; });

  m.def("prox_l0", &prox_l0, py::arg("t"), py::arg("lam"), py::arg("z"),
        "Hard-thresholding prox of lam*||.||_0 (tie at the threshold goes to 0)");
  m.def("prox_l1", &prox_l1, py::arg("t"), py::arg("lam"), py::arg("z"),
        "Soft-thresholding prox of lam*||.||_1");
  m.def("logistic_l0_objective", &logistic_l0_objective, py::arg("A"),
        py::arg("b"), py::arg("mu"), py::arg("lam"));
  m.def("least_squares_l0_objective", &least_squares_l0_objective, py::arg("A"),
        py::arg("y"), py::arg("lam"));
  m.def("least_squares_l1_objective", &least_squares_l1_objective, py::arg("A"),
        py::arg("y"), py::arg("lam"));
  m.def("quadratic_objective", &quadratic_objective, py::arg("Q"), py::arg("c"));

  py::class_<DerivativeReport>(m, "DerivativeReport")
      .def_readonly("max_gradient_error", &DerivativeReport::max_gradient_error)
      .def_readonly("max_hess_vec_error", &DerivativeReport::max_hess_vec_error);
  m.def(
      "check_derivatives",
      [](const CompositeObjective& obj, const Vector& x, double h,
         int n_directions, std::uint64_t seed) {
        return check_derivatives(obj.smooth, x, h, n_directions, seed);
      },
      py::arg("objective"), py::arg("x"), py::arg("h") = 1e-6,
      py::arg("n_directions") = 5, py::arg("seed") = 42);

  // ---- solver ----
  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("epsilon", &SolverConfig::epsilon)
      .def_readwrite("b", &SolverConfig::b)
      .def_readwrite("q", &SolverConfig::q)
      .def_readwrite("tau", &SolverConfig::tau)
      .def_readwrite("L_min", &SolverConfig::L_min)
      .def_readwrite("L_max", &SolverConfig::L_max)
      .def_readwrite("delta", &SolverConfig::delta)
      .def_readwrite("max_outer", &SolverConfig::max_outer)
      .def_readwrite("max_inner", &SolverConfig::max_inner)
      .def_readwrite("max_j", &SolverConfig::max_j)
      .def("validate", &SolverConfig::validate);

  py::class_<PgConfig>(m, "PgConfig")
      .def(py::init<>())
      .def_readwrite("epsilon", &PgConfig::epsilon)
      .def_readwrite("sigma", &PgConfig::sigma)
      .def_readwrite("max_outer", &PgConfig::max_outer)
      .def_readwrite("t_min", &PgConfig::t_min)
      .def_readwrite("t_max", &PgConfig::t_max)
      .def_readwrite("max_backtracks", &PgConfig::max_backtracks);

  py::enum_<Termination>(m, "Termination")
      .value("Stationary", Termination::Stationary)
      .value("MaxOuter", Termination::MaxOuter)
      .value("InnerFailure", Termination::InnerFailure);

  py::class_<IterateRecord>(m, "IterateRecord")
      .def_readonly("k", &IterateRecord::k)
      .def_readonly("x", &IterateRecord::x)
      .def_readonly("F_value", &IterateRecord::F_value)
      .def_readonly("step_norm", &IterateRecord::step_norm)
      .def_readonly("L_k", &IterateRecord::L_k)
      .def_readonly("j_k", &IterateRecord::j_k)
      .def_readonly("certificate_norm", &IterateRecord::certificate_norm)
      .def_readonly("prox_residual", &IterateRecord::prox_residual)
      .def_readonly("inner_iterations", &IterateRecord::inner_iterations)
      .def_readonly("certificate", &IterateRecord::certificate);

  py::class_<Trace>(m, "Trace")
      .def_readonly("records", &Trace::records)
      .def_readonly("config", &Trace::config)
      .def_readonly("termination", &Trace::termination)
      .def("__len__", [](const Trace& t) { return t.records.size(); });

  m.def("run", &run, py::arg("objective"), py::arg("x0"), py::arg("config"),
        "Inexact proximal Newton method with q-order regularization");
  m.def("pg_baseline_run", &pg_baseline_run, py::arg("objective"),
        py::arg("x0"), py::arg("config"),
        "Monotone line-search proximal gradient baseline");
  m.def("stationarity_residual", &stationarity_residual, py::arg("objective"),
        py::arg("x"), py::arg("t_res"));

  // ---- framework analysis ----
  py::class_<Violation>(m, "Violation")
      .def_readonly("k", &Violation::k)
      .def_readonly("slack", &Violation::slack);

  py::class_<ConditionCheck>(m, "ConditionCheck")
      .def_readonly("holds", &ConditionCheck::holds)
      .def_readonly("violations", &ConditionCheck::violations);

  py::class_<FrameworkReport>(m, "FrameworkReport")
      .def_readonly("p", &FrameworkReport::p)
      .def_readonly("a_fit", &FrameworkReport::a_fit)
      .def_readonly("b_fit", &FrameworkReport::b_fit)
      .def_readonly("h1_holds", &FrameworkReport::h1_holds)
      .def_readonly("h2_holds", &FrameworkReport::h2_holds)
      .def_readonly("all_steps_zero", &FrameworkReport::all_steps_zero);

  py::enum_<Regime>(m, "Regime")
      .value("Superlinear", Regime::Superlinear)
      .value("Linear", Regime::Linear)
      .value("Sublinear", Regime::Sublinear)
      .value("Inconclusive", Regime::Inconclusive);

  py::class_<RateReport>(m, "RateReport")
      .def_readonly("q_orders", &RateReport::q_orders)
      .def_readonly("q_order_tail", &RateReport::q_order_tail)
      .def_readonly("linear_rate", &RateReport::linear_rate)
      .def_readonly("r_squared", &RateReport::r_squared)
      .def_readonly("regime", &RateReport::regime);

  m.def("check_h1", &check_h1, py::arg("trace"), py::arg("a"), py::arg("p"));
  m.def("check_h2", &check_h2, py::arg("trace"), py::arg("b"), py::arg("p"));
  m.def("fit_constants", &fit_constants, py::arg("trace"), py::arg("p"));
  m.def("estimate_q_order", &estimate_q_order, py::arg("errors"),
        py::arg("scale") = 0.0);
  m.def("predicted_order", &predicted_order, py::arg("p"), py::arg("theta"));
  m.def("objective_value_order", &objective_value_order, py::arg("trace"),
        py::arg("theta"), py::arg("p"));
  m.def("iterate_errors", &iterate_errors, py::arg("trace"));

  py::class_<SyntheticKLProblem>(m, "SyntheticKLProblem")
      .def(py::init([](double gamma, double p) {
             return SyntheticKLProblem{gamma, p};
           }),
           py::arg("gamma"), py::arg("p"))
      .def_readwrite("gamma", &SyntheticKLProblem::gamma)
      .def_readwrite("p", &SyntheticKLProblem::p)
      .def_property_readonly("theta", &SyntheticKLProblem::theta);

  m.def("synth_kl_run", &synth_kl_run, py::arg("problem"), py::arg("a"),
        py::arg("b"), py::arg("x0"), py::arg("n_steps"));

  // ---- harness ----
  py::class_<DataSet>(m, "DataSet")
      .def_readonly("A", &DataSet::A)
      .def_readonly("b_or_y", &DataSet::b_or_y)
      .def_property_readonly("n", &DataSet::n)
      .def_property_readonly("dim", &DataSet::dim);

  m.def("gen_logistic_data", &gen_logistic_data, py::arg("n"), py::arg("dim"),
        py::arg("seed"), py::arg("sparsity_of_truth"));
  m.def("gen_least_squares_data", &gen_least_squares_data, py::arg("n"),
        py::arg("dim"), py::arg("seed"), py::arg("noise_sigma"),
        py::arg("support"));
  m.def("read_libsvm", &read_libsvm, py::arg("path"));
  m.def("write_libsvm", &write_libsvm, py::arg("dataset"), py::arg("path"));
  m.def(
      "write_trace",
      [](const Trace& t, const std::filesystem::path& path) {
        write_trace(t, path);
      },
      py::arg("trace"), py::arg("csv_path"));
  m.def("read_trace", &read_trace, py::arg("csv_path"));

  m.def(
      "run_experiment",
      [](const std::string& problem, const std::string& solver,
         const std::map<std::string, double>& params,
         const SolverConfig& config, const PgConfig& pg,
         const std::string& output_path, const std::string& data_path) {
        const auto result = run_experiment(make_spec(
            problem, solver, params, config, pg, output_path, data_path));
        py::object rate = py::none();
        if (result.rate_available) rate = py::cast(result.rate);
        return py::make_tuple(result.trace, result.framework, rate);
      },
      py::arg("problem"), py::arg("solver"), py::arg("params"),
      py::arg("config") = SolverConfig{}, py::arg("pg") = PgConfig{},
      py::arg("output_path") = std::string(),
      py::arg("data_path") = std::string(),
      "Returns (trace, framework_report, rate_report_or_None)");
}
