// klprox command-line front end: solve / verify / rate / gen-data / selftest.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 budget exhaustion
// (solver hit an iteration budget, or a trace is too short to rate).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "klprox/analysis.hpp"
#include "klprox/harness.hpp"
#include "klprox/rng.hpp"

using namespace klprox;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBudget = 2;

void print_result_line(double F, double residual, std::size_t iters,
                       const std::string& regime) {
  std::printf("RESULT F=%.17g residual=%.17g iters=%zu regime=%s\n", F,
              residual, iters, regime.c_str());
}

int run_solve(const std::string& problem, const std::string& solver,
              const ExperimentSpec& base_spec) {
  ExperimentSpec spec = base_spec;
  if (problem == "libsvm-logistic") {
    if (spec.data_path.empty()) {
      std::fprintf(stderr, "error: --problem libsvm-logistic requires --data\n");
      return kExitUsage;
    }
    spec.problem = ProblemKind::LogisticL0;
  } else {
    spec.problem = problem_from_string(problem);
  }
  spec.solver = solver_from_string(solver);
  if (spec.problem == ProblemKind::SyntheticKL &&
      spec.solver != SolverKind::SynthGenerator) {
    std::fprintf(stderr,
                 "error: --problem synthetic-kl requires --solver synth\n");
    return kExitUsage;
  }

  const ExperimentResult result = run_experiment(spec);
  const auto& last = result.trace.records.back();

  std::printf("problem=%s solver=%s records=%zu termination=%s\n",
              to_string(spec.problem).c_str(), to_string(spec.solver).c_str(),
              result.trace.records.size(),
              to_string(result.trace.termination).c_str());
  std::printf("framework p=%g a_fit=%.6g b_fit=%.6g h1=%s h2=%s\n", result.p,
              result.framework.a_fit, result.framework.b_fit,
              result.framework.h1_holds ? "pass" : "fail",
              result.framework.h2_holds ? "pass" : "fail");
  if (result.rate_available) {
    std::printf("rate tail_median=%.4f rho=%.4f r2=%.4f\n",
                result.rate.q_order_tail, result.rate.linear_rate,
                result.rate.r_squared);
  }
  if (!spec.output_path.empty()) {
    std::printf("trace written to %s\n",
                (fs::path(spec.output_path) / "trace.csv").string().c_str());
  }
  print_result_line(last.F_value, last.prox_residual,
                    result.trace.records.size() - 1,
                    result.rate_available ? to_string(result.rate.regime)
                                          : "n/a");
  // The synthetic generator runs a fixed horizon; only the solvers can
  // exhaust a budget.
  if (spec.solver == SolverKind::SynthGenerator) return kExitOk;
  return result.trace.termination == Termination::Stationary ? kExitOk
                                                             : kExitBudget;
}

int run_verify(const std::string& trace_path, double p,
               std::optional<double> a, std::optional<double> b) {
  const Trace trace = read_trace(trace_path);
  const auto report = fit_constants(trace, p);
  std::printf("records=%zu p=%g fitted_a=%.6g fitted_b=%.6g\n",
              trace.records.size(), p, report.a_fit, report.b_fit);

  bool all_hold = true;
  if (a) {
    const auto check = check_h1(trace, *a, p);
    std::printf("H1 with a=%.6g: %s", *a, check.holds ? "pass" : "fail");
    if (!check.holds) {
      std::printf(" (first violation at k=%d, slack %.3g)",
                  check.violations[0].k, check.violations[0].slack);
    }
    std::printf("\n");
    all_hold = all_hold && check.holds;
  }
  if (b) {
    const auto check = check_h2(trace, *b, p);
    std::printf("H2 with b=%.6g: %s", *b, check.holds ? "pass" : "fail");
    if (!check.holds) {
      std::printf(" (first violation at k=%d, slack %.3g)",
                  check.violations[0].k, check.violations[0].slack);
    }
    std::printf("\n");
    all_hold = all_hold && check.holds;
  }
  return all_hold ? kExitOk : kExitUsage;
}

int run_rate(const std::string& trace_path, double theta, double p,
             int max_entries) {
  const Trace trace = read_trace(trace_path);
  auto errors = iterate_errors(trace);
  if (max_entries > 0 && static_cast<int>(errors.size()) > max_entries) {
    errors.resize(static_cast<std::size_t>(max_entries));
  }
  double scale = trace.records.back().x.norm();
  for (double e : errors) scale = std::max(scale, e);

  const RateReport report = estimate_q_order(errors, scale);
  std::printf("per-triple orders:");
  for (double est : report.q_orders) std::printf(" %.4f", est);
  std::printf("\ntail_median=%.4f rho=%.4f r2=%.4f regime=%s\n",
              report.q_order_tail, report.linear_rate, report.r_squared,
              to_string(report.regime).c_str());

  const double boundary = p / (p + 1.0);
  if (theta > 0.0 && theta < boundary) {
    std::printf("predicted order p/(theta*(1+p)) = %.6g\n",
                predicted_order(p, theta));
  } else if (theta == boundary) {
    std::printf("boundary regime: R-linear expected\n");
  } else {
    std::printf("theta above p/(p+1): sublinear regime expected\n");
  }
  return kExitOk;
}

int run_gen_data(const std::string& kind, int n, int dim, std::uint64_t seed,
                 const std::string& out, int support, double noise) {
  DataSet ds;
  if (kind == "logistic") {
    ds = gen_logistic_data(n, dim, seed, support);
  } else if (kind == "least-squares") {
    ds = gen_least_squares_data(n, dim, seed, noise, support);
  } else {
    std::fprintf(stderr, "error: unknown --kind %s\n", kind.c_str());
    return kExitUsage;
  }
  write_libsvm(ds, out);
  std::printf("wrote %d rows, %d columns to %s\n", n, dim, out.c_str());
  return kExitOk;
}

int run_selftest() {
  int bad = 0;
  const auto check = [&](bool ok, const char* name) {
    std::printf("%s: %s\n", ok ? "ok" : "FAIL", name);
    bad += !ok;
  };

  Vector z(2);
  z << 0.5, 0.3;
  const Vector hard = prox_l0(1.0, 0.1, z);
  check(hard[0] == 0.5 && hard[1] == 0.0, "l0 hard threshold");
  const Vector soft = prox_l1(1.0, 0.2, z);
  check(std::abs(soft[0] - 0.3) < 1e-15 && std::abs(soft[1] - 0.1) < 1e-15,
        "l1 soft threshold");

  const auto data = gen_logistic_data(40, 6, 3, 2);
  const auto obj = logistic_l0_objective(data.A, data.b_or_y, 1e-5, 0.1);
  Vector x(6);
  Xoshiro256 rng(5);
  for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  const auto deriv = check_derivatives(obj.smooth, x, 1e-6);
  check(deriv.max_gradient_error <= 1e-6 && deriv.max_hess_vec_error <= 1e-5,
        "logistic derivatives vs finite differences");

  const auto ls = gen_least_squares_data(30, 5, 7, 0.05, 2);
  const auto ls_obj = least_squares_l0_objective(ls.A, ls.b_or_y, 0.1);
  SolverConfig cfg;
  cfg.epsilon = 1e-8;
  const Trace trace = run(ls_obj, Vector::Zero(5), cfg);
  check(trace.termination == Termination::Stationary, "small solve reaches stationarity");
  check(check_h1(trace, cfg.delta * cfg.L_min / cfg.q, cfg.q - 1.0).holds,
        "H1 holds on the small solve");

  const fs::path tmp = fs::temp_directory_path() / "klprox_selftest";
  fs::create_directories(tmp);
  write_trace(trace, tmp / "trace.csv");
  const Trace back = read_trace(tmp / "trace.csv");
  check(back.records.size() == trace.records.size() &&
            back.records.back().F_value == trace.records.back().F_value,
        "trace persistence round trip");

  std::printf(bad == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return bad == 0 ? kExitOk : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "klprox: inexact proximal Newton method with q-order regularization,\n"
      "a proximal-gradient baseline, and an H1-H2 framework verifier.\n"
      "Exit codes: 0 success, 1 usage or I/O error, 2 budget exhaustion."};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "TOML config file ([subcommand] sections mirror the flag "
                 "names); explicit flags override it");

  // ---- solve ----
  auto* solve_cmd = app.add_subcommand("solve", "Run a solver on a problem");
  solve_cmd->fallthrough();
  std::string problem = "quadratic";
  std::string solver = "prox-newton";
  std::string data_path;
  std::string out_dir = "klprox-out";
  ExperimentSpec spec;
  double q = 3.0, epsilon = 1e-8, tau = 2.0, delta = 0.5, L_min = 1e-3,
         L_max = 1e3, b = 1.0;
  int max_outer = 500, max_inner = 2000;
  std::uint64_t seed = 0;
  double n_param = 200, dim_param = 50, mu = 1e-5, lambda = 0.1, noise = 0.1,
         support = 5, x0 = 0.0, gamma = 2.0, p_param = 2.0, a_param = 1.0,
         n_steps = 40;

  solve_cmd->add_option("--problem", problem,
                        "quadratic | least-squares-l0 | least-squares-l1 | "
                        "logistic-l0 | libsvm-logistic | synthetic-kl")
      ->capture_default_str();
  solve_cmd->add_option("--solver", solver, "prox-newton | pg | synth")
      ->capture_default_str();
  solve_cmd->add_option("--q", q, "regularization order q in [2,3]")
      ->capture_default_str();
  solve_cmd->add_option("--epsilon", epsilon, "stationarity tolerance (epsilon)")
      ->capture_default_str();
  solve_cmd->add_option("--tau", tau, "L escalation factor (tau > 1)")
      ->capture_default_str();
  solve_cmd->add_option("--delta", delta,
                        "sufficient-decrease fraction (delta in (0,1))")
      ->capture_default_str();
  solve_cmd->add_option("--l-min", L_min, "lower bound L_min for L_{k,0}")
      ->capture_default_str();
  solve_cmd->add_option("--l-max", L_max, "upper bound L_max for L_{k,0}")
      ->capture_default_str();
  solve_cmd->add_option("--b", b, "inexactness constant (b)")
      ->capture_default_str();
  solve_cmd->add_option("--max-outer", max_outer, "outer iteration budget")
      ->capture_default_str();
  solve_cmd->add_option("--max-inner", max_inner, "inner iteration budget")
      ->capture_default_str();
  solve_cmd->add_option("--seed", seed, "PRNG seed (xoshiro256++)")
      ->capture_default_str();
  solve_cmd->add_option("--data", data_path, "libsvm input file");
  solve_cmd->add_option("--out", out_dir, "output directory for the trace")
      ->capture_default_str();
  solve_cmd->add_option("--n", n_param, "rows for generated data")
      ->capture_default_str();
  solve_cmd->add_option("--dim", dim_param, "problem dimension")
      ->capture_default_str();
  solve_cmd->add_option("--mu", mu, "ridge weight of the logistic model")
      ->capture_default_str();
  solve_cmd->add_option("--lambda", lambda, "regularizer weight")
      ->capture_default_str();
  solve_cmd->add_option("--noise", noise, "noise sigma for generated data")
      ->capture_default_str();
  solve_cmd->add_option("--support", support, "ground-truth support size")
      ->capture_default_str();
  solve_cmd->add_option("--x0", x0, "constant fill of the start point")
      ->capture_default_str();
  solve_cmd->add_option("--gamma", gamma, "synthetic KL: Phi = |x|^gamma")
      ->capture_default_str();
  solve_cmd->add_option("--p", p_param, "synthetic KL: framework exponent p")
      ->capture_default_str();
  solve_cmd->add_option("--a", a_param, "synthetic KL: H1 constant a")
      ->capture_default_str();
  solve_cmd->add_option("--n-steps", n_steps, "synthetic KL: steps to generate")
      ->capture_default_str();

  // ---- verify ----
  auto* verify_cmd =
      app.add_subcommand("verify", "Check H1-H2 on a stored trace");
  verify_cmd->fallthrough();
  std::string verify_trace;
  double verify_p = 0.0;
  double verify_a = 0.0, verify_b = 0.0;
  verify_cmd->add_option("--trace", verify_trace, "trace CSV path")->required();
  auto* p_opt =
      verify_cmd->add_option("--p", verify_p, "framework exponent p")->required();
  auto* a_opt = verify_cmd->add_option("--a", verify_a, "H1 constant to test");
  auto* b_opt = verify_cmd->add_option("--b", verify_b, "H2 constant to test");
  (void)p_opt;

  // ---- rate ----
  auto* rate_cmd =
      app.add_subcommand("rate", "Estimate convergence order from a trace");
  rate_cmd->fallthrough();
  std::string rate_trace;
  double rate_theta = 0.5, rate_p = 2.0;
  int rate_max_entries = 0;
  rate_cmd->add_option("--trace", rate_trace,
                       "trace CSV path (iterate sidecar required)")
      ->required();
  rate_cmd->add_option("--theta", rate_theta, "KL exponent theta")->required();
  rate_cmd->add_option("--p", rate_p, "framework exponent p")->required();
  rate_cmd->add_option("--max-entries", rate_max_entries,
                       "use only the first N error entries (0 = all)")
      ->capture_default_str();

  // ---- gen-data ----
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a libsvm dataset");
  gen_cmd->fallthrough();
  std::string gen_kind = "logistic";
  int gen_n = 200, gen_dim = 50, gen_support = 5;
  double gen_noise = 0.1;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "data.libsvm";
  gen_cmd->add_option("--kind", gen_kind, "logistic | least-squares")
      ->capture_default_str();
  gen_cmd->add_option("--n", gen_n, "rows")->capture_default_str();
  gen_cmd->add_option("--dim", gen_dim, "columns")->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed, "PRNG seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output path")->capture_default_str();
  gen_cmd->add_option("--support", gen_support, "ground-truth support size")
      ->capture_default_str();
  gen_cmd->add_option("--noise", gen_noise, "noise sigma (least-squares)")
      ->capture_default_str();

  // ---- selftest ----
  app.add_subcommand("selftest", "Run built-in smoke checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) {
      if (q < 2.0 || q > 3.0) {
        std::fprintf(stderr, "error: --q must lie in [2, 3]\n");
        return kExitUsage;
      }
      if (n_param < 1 || dim_param < 1) {
        std::fprintf(stderr, "error: sizes must be positive\n");
        return kExitUsage;
      }
      spec.config.q = q;
      spec.config.epsilon = epsilon;
      spec.config.tau = tau;
      spec.config.delta = delta;
      spec.config.L_min = L_min;
      spec.config.L_max = L_max;
      spec.config.b = b;
      spec.config.max_outer = max_outer;
      spec.config.max_inner = max_inner;
      spec.config.validate();
      spec.pg.epsilon = epsilon;
      spec.pg.max_outer = max_outer;
      spec.data_path = data_path;
      spec.output_path = out_dir;
      spec.params = {{"n", n_param},     {"dim", dim_param},
                     {"mu", mu},         {"lambda", lambda},
                     {"noise", noise},   {"support", support},
                     {"x0", x0},         {"gamma", gamma},
                     {"p", p_param},     {"a", a_param},
                     {"b", b},           {"n_steps", n_steps},
                     {"seed", static_cast<double>(seed)}};
      return run_solve(problem, solver, spec);
    }
    if (verify_cmd->parsed()) {
      return run_verify(verify_trace, verify_p,
                        a_opt->count() ? std::optional<double>(verify_a)
                                       : std::nullopt,
                        b_opt->count() ? std::optional<double>(verify_b)
                                       : std::nullopt);
    }
    if (rate_cmd->parsed()) {
      return run_rate(rate_trace, rate_theta, rate_p, rate_max_entries);
    }
    if (gen_cmd->parsed()) {
      if (gen_n < 1 || gen_dim < 1) {
        std::fprintf(stderr, "error: --n and --dim must be positive\n");
        return kExitUsage;
      }
      return run_gen_data(gen_kind, gen_n, gen_dim, gen_seed, gen_out,
                          gen_support, gen_noise);
    }
    return run_selftest();
  } catch (const TooShortError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBudget;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
