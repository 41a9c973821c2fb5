#include "klprox/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace klprox {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
}  // namespace

ConditionCheck check_h1(const Trace& trace, double a, double p) {
  if (trace.records.size() < 2) {
    throw std::invalid_argument("check_h1: trace needs at least 2 records");
  }
  ConditionCheck out;
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const double F_k = trace.records[k].F_value;
    const double F_next = trace.records[k + 1].F_value;
    const double step = trace.records[k + 1].step_norm;
    const double tol = 1e-12 * (1.0 + std::abs(F_k));
    const double lhs = F_next + a * std::pow(step, p + 1.0);
    if (lhs > F_k + tol) {
      out.holds = false;
      out.violations.push_back({static_cast<int>(k), lhs - F_k});
    }
  }
  return out;
}

ConditionCheck check_h2(const Trace& trace, double b, double p) {
  if (trace.records.size() < 2) {
    throw std::invalid_argument("check_h2: trace needs at least 2 records");
  }
  ConditionCheck out;
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const double cert = trace.records[k + 1].certificate_norm;
    const double step = trace.records[k + 1].step_norm;
    const double bound = b * std::pow(step, p) + 1e-12;
    if (cert > bound) {
      out.holds = false;
      out.violations.push_back({static_cast<int>(k), cert - bound});
    }
  }
  return out;
}

FrameworkReport fit_constants(const Trace& trace, double p) {
  if (trace.records.size() < 2) {
    throw std::invalid_argument("fit_constants: trace needs at least 2 records");
  }
  FrameworkReport report;
  report.p = p;
  double a_fit = kInf;
  double b_fit = 0.0;
  bool any_step = false;
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const double step = trace.records[k + 1].step_norm;
    if (step <= 0.0) continue;
    any_step = true;
    const double drop =
        trace.records[k].F_value - trace.records[k + 1].F_value;
    a_fit = std::min(a_fit, drop / std::pow(step, p + 1.0));
    b_fit = std::max(b_fit,
                     trace.records[k + 1].certificate_norm / std::pow(step, p));
  }
  report.all_steps_zero = !any_step;
  report.a_fit = any_step ? a_fit : kInf;
  report.b_fit = b_fit;
  const auto h1 = check_h1(trace, any_step ? report.a_fit : 0.0, p);
  const auto h2 = check_h2(trace, report.b_fit, p);
  report.h1_holds = h1.holds;
  report.h2_holds = h2.holds;
  report.violations = h1.violations;
  report.violations.insert(report.violations.end(), h2.violations.begin(),
                           h2.violations.end());
  return report;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Superlinear: return "Superlinear";
    case Regime::Linear: return "Linear";
    case Regime::Sublinear: return "Sublinear";
    case Regime::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

RateReport estimate_q_order(const std::vector<double>& errors, double scale) {
  double max_error = 0.0;
  for (double e : errors) max_error = std::max(max_error, e);
  if (scale <= 0.0) scale = max_error;
  const double floor = 1e2 * kEps * scale;

  std::vector<double> usable;
  usable.reserve(errors.size());
  for (double e : errors) {
    if (e > floor && std::isfinite(e)) usable.push_back(e);
  }
  if (usable.size() < 4) {
    throw TooShortError("estimate_q_order: fewer than 4 usable error entries");
  }

  RateReport report;
  const std::size_t m = usable.size();
  std::vector<double> logs(m);
  for (std::size_t i = 0; i < m; ++i) logs[i] = std::log(usable[i]);

  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double d1 = logs[k] - logs[k - 1];
    const double d2 = logs[k + 1] - logs[k];
    if (d1 == 0.0) continue;
    const double est = d2 / d1;
    if (std::isfinite(est)) report.q_orders.push_back(est);
  }
  if (report.q_orders.empty()) {
    throw TooShortError("estimate_q_order: no finite triple estimates");
  }

  const std::size_t available = report.q_orders.size();
  const std::size_t tail = std::min<std::size_t>(
      5, std::max<std::size_t>(1, available - 1));
  std::vector<double> tail_block(report.q_orders.end() - tail,
                                 report.q_orders.end());
  std::sort(tail_block.begin(), tail_block.end());
  report.q_order_tail = tail_block.size() % 2 == 1
                            ? tail_block[tail_block.size() / 2]
                            : 0.5 * (tail_block[tail_block.size() / 2 - 1] +
                                     tail_block[tail_block.size() / 2]);

  // Least-squares fit of log e_k against k.
  double mean_k = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mean_k += static_cast<double>(i);
    mean_y += logs[i];
  }
  mean_k /= static_cast<double>(m);
  mean_y /= static_cast<double>(m);
  double s_kk = 0.0, s_ky = 0.0, s_yy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dk = static_cast<double>(i) - mean_k;
    const double dy = logs[i] - mean_y;
    s_kk += dk * dk;
    s_ky += dk * dy;
    s_yy += dy * dy;
  }
  const double slope = s_kk > 0.0 ? s_ky / s_kk : 0.0;
  report.linear_rate = std::exp(slope);
  report.r_squared =
      (s_kk > 0.0 && s_yy > 0.0) ? (s_ky * s_ky) / (s_kk * s_yy) : 0.0;

  const bool decreasing = usable.front() > usable.back();
  if (report.q_order_tail >= 1.1) {
    report.regime = Regime::Superlinear;
  } else if (slope < 0.0 && report.r_squared >= 0.95 &&
             report.q_order_tail > 0.9 && report.q_order_tail < 1.1) {
    report.regime = Regime::Linear;
  } else if (report.r_squared < 0.8 && decreasing) {
    report.regime = Regime::Sublinear;
  } else {
    report.regime = Regime::Inconclusive;
  }
  return report;
}

double predicted_order(double p, double theta) {
  if (p <= 0.0) throw std::invalid_argument("predicted_order: p must be positive");
  if (theta <= 0.0 || theta >= p / (p + 1.0)) {
    throw ThetaOutOfRegime("predicted_order: theta outside (0, p/(p+1))");
  }
  return p / (theta * (1.0 + p));
}

std::vector<double> iterate_errors(const Trace& trace) {
  if (trace.records.size() < 2) {
    throw std::invalid_argument("iterate_errors: trace needs at least 2 records");
  }
  const Vector& limit = trace.records.back().x;
  if (limit.size() == 0) {
    throw std::invalid_argument("iterate_errors: trace carries no iterate vectors");
  }
  std::vector<double> errors;
  errors.reserve(trace.records.size() - 1);
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    if (trace.records[k].x.size() != limit.size()) {
      throw std::invalid_argument("iterate_errors: missing iterate vector");
    }
    errors.push_back((trace.records[k].x - limit).norm());
  }
  return errors;
}

RateReport objective_value_order(const Trace& trace, double theta, double p) {
  if (theta <= 0.0 || theta >= 1.0 || p <= 0.0) {
    throw std::invalid_argument(
        "objective_value_order: need theta in (0,1) and p > 0");
  }
  if (trace.records.size() < 2) {
    throw std::invalid_argument("objective_value_order: trace too short");
  }
  const double F_limit = trace.records.back().F_value;
  std::vector<double> gaps;
  gaps.reserve(trace.records.size() - 1);
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    gaps.push_back(trace.records[k].F_value - F_limit);
  }
  double scale = 1.0 + std::abs(F_limit);
  for (double g : gaps) scale = std::max(scale, g);
  return estimate_q_order(gaps, scale);
}

Trace synth_kl_run(const SyntheticKLProblem& problem, double a, double b,
                   const Vector& x0, int n_steps) {
  if (problem.gamma <= 1.0) throw std::invalid_argument("synth_kl_run: gamma must exceed 1");
  if (problem.p <= 0.0) throw std::invalid_argument("synth_kl_run: p must be positive");
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("synth_kl_run: a and b must be positive");
  if (n_steps < 1) throw std::invalid_argument("synth_kl_run: n_steps must be >= 1");
  const double x0_norm = x0.norm();
  if (x0_norm == 0.0) throw std::invalid_argument("synth_kl_run: x0 must be nonzero");

  const double theta = problem.theta();
  const double p = problem.p;
  // KL-tight level: Phi_k = D * step_k^(p/theta) with D = (b*(1-theta))^(1/theta),
  // the equality case of the desingularizer chain with unit modulus.
  const double D = std::pow(b * (1.0 - theta), 1.0 / theta);
  const double gap_exponent = p / theta;

  // Solve a*t^(p+1) + D*t^(p/theta) = rhs by bisection: H1 with equality
  // while the new gap stays on the KL-tight level set. The left side is
  // increasing in t, so the root in (0, hi] is unique.
  const auto next_step = [&](double rhs, double hi) {
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double lhs =
          a * std::pow(mid, p + 1.0) + D * std::pow(mid, gap_exponent);
      if (lhs < rhs) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  const double phi0 = std::pow(x0_norm, problem.gamma);
  std::vector<double> steps(1, 0.0);
  std::vector<double> phi(1, phi0);
  steps.reserve(static_cast<std::size_t>(n_steps) + 1);
  phi.reserve(static_cast<std::size_t>(n_steps) + 1);

  for (int k = 0; k < n_steps; ++k) {
    const double rhs = k == 0 ? phi0 : D * std::pow(steps.back(), gap_exponent);
    const double hi =
        k == 0 ? std::pow(phi0 / D, theta / p) : steps.back();
    const double t = next_step(rhs, hi);
    const double phi_next = phi.back() - a * std::pow(t, p + 1.0);
    // Stop once floating point can no longer represent progress.
    if (t <= 0.0 || phi_next <= 0.0 || phi_next >= phi.back()) break;
    steps.push_back(t);
    phi.push_back(phi_next);
  }
  const int n_recorded = static_cast<int>(steps.size()) - 1;

  // Distances to the limit are the step tail sums, so positions on the ray
  // are consistent with the recorded step norms.
  std::vector<double> dist(static_cast<std::size_t>(n_recorded) + 1, 0.0);
  for (int k = n_recorded - 1; k >= 0; --k) {
    dist[static_cast<std::size_t>(k)] =
        dist[static_cast<std::size_t>(k) + 1] +
        steps[static_cast<std::size_t>(k) + 1];
  }
  const Vector direction = x0 / x0_norm;

  Trace trace;
  trace.config.q = std::min(3.0, std::max(2.0, p + 1.0));
  trace.config.epsilon = 1e-300;  // the generator has no stopping rule
  trace.config.max_outer = n_steps;
  trace.termination = Termination::MaxOuter;

  for (int k = 0; k <= n_recorded; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    IterateRecord rec;
    rec.k = k;
    rec.x = dist[ku] * direction;
    rec.F_value = phi[ku];
    rec.step_norm = k == 0 ? 0.0 : steps[ku];
    rec.L_k = trace.config.L_min;
    rec.certificate_norm = k == 0 ? 0.0 : b * std::pow(steps[ku], p);
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace klprox
