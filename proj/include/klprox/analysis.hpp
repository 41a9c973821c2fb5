#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "klprox/solver.hpp"

namespace klprox {

struct Violation {
  int k = 0;        // index of the offending transition (record k -> k+1)
  double slack = 0; // amount by which the inequality fails
};

struct ConditionCheck {
  bool holds = true;
  std::vector<Violation> violations;
};

/// H1: F_{k+1} + a*step_{k+1}^(p+1) <= F_k, with relative tolerance
/// 1e-12*(1+|F_k|).
ConditionCheck check_h1(const Trace& trace, double a, double p);

/// H2: cert_{k+1} <= b*step_{k+1}^p + 1e-12. Zero steps require a zero
/// certificate.
ConditionCheck check_h2(const Trace& trace, double b, double p);

struct FrameworkReport {
  double p = 1.0;
  double a_fit = 0.0;  // largest a with H1 trace-wide
  double b_fit = 0.0;  // smallest b with H2 trace-wide
  bool h1_holds = false;
  bool h2_holds = false;
  bool all_steps_zero = false;  // a_fit carries +inf in that case
  std::vector<Violation> violations;
};

/// a_fit = min_k (F_k - F_{k+1}) / step^(p+1), b_fit = max_k cert / step^p
/// over transitions with a nonzero step.
FrameworkReport fit_constants(const Trace& trace, double p);

enum class Regime { Superlinear, Linear, Sublinear, Inconclusive };

std::string to_string(Regime r);

struct RateReport {
  std::vector<double> q_orders;  // per-triple estimates
  double q_order_tail = 0.0;     // median of the last m estimates
  double linear_rate = 0.0;      // rho = exp(slope of log e_k vs k)
  double r_squared = 0.0;
  Regime regime = Regime::Inconclusive;
};

class TooShortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ThetaOutOfRegime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-triple Q-order estimates log(e_{k+1}/e_k) / log(e_k/e_{k-1}) after
/// dropping entries below 100*eps*scale (scale defaults to the largest
/// error). Throws TooShortError with fewer than 4 usable entries.
RateReport estimate_q_order(const std::vector<double>& errors,
                            double scale = 0.0);

/// Predicted superlinear order p/(theta*(1+p)) for a KL exponent theta;
/// only defined for theta in (0, p/(p+1)).
double predicted_order(double p, double theta);

/// Q-order estimation on the objective gaps F_k - F_final.
RateReport objective_value_order(const Trace& trace, double theta, double p);

/// |x^k - x_final| for k before the final record; requires stored iterates.
std::vector<double> iterate_errors(const Trace& trace);

/// Scalar testbed for the predicted KL rate regimes: Phi(x) = |x|^gamma
/// has KL exponent theta = 1 - 1/gamma at the origin.
struct SyntheticKLProblem {
  double gamma = 2.0;
  double p = 2.0;

  double theta() const { return 1.0 - 1.0 / gamma; }
};

/// Generates a trace satisfying H1 with equality and H2 with equality
/// (b_fit = b exactly), with the objective gap pinned to the KL-tight level
/// set. Iterates live on the ray from x0 toward 0; the per-step recursion is
/// solved by bisection.
Trace synth_kl_run(const SyntheticKLProblem& problem, double a, double b,
                   const Vector& x0, int n_steps);

}  // namespace klprox
