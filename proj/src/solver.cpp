#include "klprox/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace klprox {

void SolverConfig::validate() const {
  if (epsilon <= 0.0) throw std::invalid_argument("config: epsilon must be positive");
  if (b <= 0.0) throw std::invalid_argument("config: b must be positive");
  if (q < 2.0 || q > 3.0) throw std::invalid_argument("config: q must lie in [2, 3]");
  if (tau <= 1.0) throw std::invalid_argument("config: tau must exceed 1");
  if (L_min <= 0.0) throw std::invalid_argument("config: L_min must be positive");
  if (L_max < L_min) throw std::invalid_argument("config: L_max must be >= L_min");
  if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("config: delta must lie in (0, 1)");
  if (max_outer < 1) throw std::invalid_argument("config: max_outer must be >= 1");
  if (max_inner < 1) throw std::invalid_argument("config: max_inner must be >= 1");
  if (max_j < 0) throw std::invalid_argument("config: max_j must be >= 0");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Stationary: return "Stationary";
    case Termination::MaxOuter: return "MaxOuter";
    case Termination::InnerFailure: return "InnerFailure";
  }
  return "Unknown";
}

Termination termination_from_string(const std::string& s) {
  if (s == "Stationary") return Termination::Stationary;
  if (s == "MaxOuter") return Termination::MaxOuter;
  if (s == "InnerFailure") return Termination::InnerFailure;
  throw std::invalid_argument("unknown termination: " + s);
}

double bb_initialize(const SmoothModel& f, const Vector& prev_x,
                     const Vector& x, double L_min, double L_max) {
  const Vector dx = x - prev_x;
  const double dx_norm = dx.norm();
  if (dx_norm == 0.0) return L_min;
  const Vector dy = f.hess_vec(x, dx) - f.hess_vec(prev_x, dx);
  const double dy_norm = dy.norm();
  const double pairing = std::abs(dx.dot(dy));
  if (pairing <= 1e-14 * dx_norm * dy_norm || dy_norm == 0.0) return L_min;
  const double c1 = dy_norm * dy_norm * dy_norm / (pairing * pairing);
  const double c2 = pairing / (dx_norm * dx_norm * dx_norm);
  return std::min(std::max(std::max(c1, c2), L_min), L_max);
}

double stationarity_residual(const CompositeObjective& obj, const Vector& x,
                             double t_res) {
  if (t_res <= 0.0) throw std::invalid_argument("stationarity_residual: t_res must be positive");
  const Vector grad = obj.smooth.gradient(x);
  const Vector moved = obj.regularizer.prox(t_res, x - t_res * grad);
  return (x - moved).norm() / t_res;
}

namespace {

// Fixed residual scale for a run: 1 / (1 + curvature estimate at x0).
double residual_scale(const CompositeObjective& obj, const Vector& x0) {
  const double curvature = estimate_operator_norm(
      [&](const Vector& v) { return obj.smooth.hess_vec(x0, v); }, x0.size());
  return 1.0 / (1.0 + curvature);
}

}  // namespace

std::optional<IterateRecord> step(const CompositeObjective& obj,
                                  const Vector& x, double L_k0,
                                  const SolverConfig& cfg,
                                  const std::optional<Vector>& warm_start) {
  const double F_x = obj.value(x);
  if (!std::isfinite(F_x)) throw std::invalid_argument("step: F(x) is not finite");
  const Vector grad = obj.smooth.gradient(x);
  const Vector center = x;
  auto hess_apply = [&obj, center](const Vector& v) {
    return obj.smooth.hess_vec(center, v);
  };

  for (int j = 0; j <= cfg.max_j; ++j) {
    SubproblemSpec spec;
    spec.reg = obj.regularizer;
    spec.center = x;
    spec.grad_at_center = grad;
    spec.hess_vec_at_center = hess_apply;
    spec.L = std::pow(cfg.tau, j) * L_k0;
    spec.q = cfg.q;
    spec.b = cfg.b;

    SubproblemOptions opts;
    opts.max_inner = cfg.max_inner;
    opts.warm_start = warm_start;

    auto inexact = solve(spec, opts);
    if (!inexact) continue;  // certify failed at this L; escalate

    const Vector d = inexact->point - x;
    const double step_norm = d.norm();
    // A zero displacement cannot advance the outer loop; escalating L
    // changes the inner step scale and can free a trapped coordinate.
    if (step_norm == 0.0) continue;

    const double F_new = obj.value(inexact->point);
    const double required_drop =
        (cfg.delta / cfg.q) * spec.L * std::pow(step_norm, cfg.q);
    if (F_new > F_x - required_drop) continue;

    // Outer certificate: lift the model subgradient to F at the new point.
    Vector w = inexact->certificate + obj.smooth.gradient(inexact->point) -
               grad - obj.smooth.hess_vec(x, d) -
               spec.L * std::pow(step_norm, cfg.q - 2.0) * d;

    IterateRecord rec;
    rec.x = inexact->point;
    rec.F_value = F_new;
    rec.step_norm = step_norm;
    rec.L_k = spec.L;
    rec.j_k = j;
    rec.certificate_norm = w.norm();
    rec.inner_iterations = inexact->inner_iterations;
    rec.certificate = std::move(w);
    rec.inner_certificate = inexact->certificate;
    return rec;
  }
  return std::nullopt;
}

Trace run(const CompositeObjective& obj, const Vector& x0,
          const SolverConfig& cfg) {
  cfg.validate();
  if (!obj.regularizer.domain_test(x0)) {
    throw std::invalid_argument("run: x0 outside dom g");
  }
  const double F0 = obj.value(x0);
  if (!std::isfinite(F0)) throw std::invalid_argument("run: F(x0) is not finite");

  const double t_res = residual_scale(obj, x0);

  Trace trace;
  trace.config = cfg;

  IterateRecord first;
  first.k = 0;
  first.x = x0;
  first.F_value = F0;
  first.L_k = cfg.L_min;
  first.prox_residual = stationarity_residual(obj, x0, t_res);
  trace.records.push_back(first);

  Vector x = x0;
  Vector prev_x;
  bool have_prev = false;
  double residual = first.prox_residual;
  trace.termination = Termination::MaxOuter;

  for (int k = 0;; ++k) {
    if (residual <= cfg.epsilon) {
      trace.termination = Termination::Stationary;
      break;
    }
    if (k >= cfg.max_outer) {
      trace.termination = Termination::MaxOuter;
      break;
    }

    const double L_k0 =
        have_prev ? bb_initialize(obj.smooth, prev_x, x, cfg.L_min, cfg.L_max)
                  : cfg.L_min;
    std::optional<Vector> warm;
    if (have_prev) warm = x + (x - prev_x);

    auto rec = step(obj, x, L_k0, cfg, warm);
    if (!rec) {
      trace.termination = Termination::InnerFailure;
      break;
    }
    rec->k = k + 1;
    rec->prox_residual = stationarity_residual(obj, rec->x, t_res);

    prev_x = std::move(x);
    x = rec->x;
    have_prev = true;
    residual = rec->prox_residual;
    trace.records.push_back(std::move(*rec));
  }
  return trace;
}

Trace pg_baseline_run(const CompositeObjective& obj, const Vector& x0,
                      const PgConfig& cfg) {
  if (cfg.epsilon <= 0.0 || cfg.sigma <= 0.0 || cfg.max_outer < 1) {
    throw std::invalid_argument("pg config: invalid parameters");
  }
  if (!obj.regularizer.domain_test(x0)) {
    throw std::invalid_argument("pg_baseline_run: x0 outside dom g");
  }
  const double F0 = obj.value(x0);
  if (!std::isfinite(F0)) {
    throw std::invalid_argument("pg_baseline_run: F(x0) is not finite");
  }

  const double t_res = residual_scale(obj, x0);

  Trace trace;
  trace.config.epsilon = cfg.epsilon;
  trace.config.q = 2.0;  // H1-H2 hold with p = 1 for this baseline
  trace.config.max_outer = cfg.max_outer;

  IterateRecord first;
  first.k = 0;
  first.x = x0;
  first.F_value = F0;
  first.L_k = trace.config.L_min;
  first.prox_residual = stationarity_residual(obj, x0, t_res);
  trace.records.push_back(first);

  Vector x = x0;
  double F_x = F0;
  Vector grad = obj.smooth.gradient(x);
  Vector prev_x, prev_grad;
  bool have_prev = false;
  double t = t_res;
  double residual = first.prox_residual;
  trace.termination = Termination::MaxOuter;

  for (int k = 0;; ++k) {
    if (residual <= cfg.epsilon) {
      trace.termination = Termination::Stationary;
      break;
    }
    if (k >= cfg.max_outer) {
      trace.termination = Termination::MaxOuter;
      break;
    }

    if (have_prev) {
      const Vector dx = x - prev_x;
      const Vector dy = grad - prev_grad;
      const double pairing = dx.dot(dy);
      if (pairing > 1e-14 * dx.norm() * dy.norm()) {
        t = dx.squaredNorm() / pairing;  // BB spectral step
      }
    }
    t = std::min(std::max(t, cfg.t_min), cfg.t_max);

    Vector x_next;
    double F_next = 0.0;
    int backtracks = 0;
    bool accepted = false;
    for (; backtracks <= cfg.max_backtracks; ++backtracks) {
      x_next = obj.regularizer.prox(t, x - t * grad);
      F_next = obj.value(x_next);
      const double step_sq = (x_next - x).squaredNorm();
      // Strict decrease keeps the recorded drops positive; a step whose
      // decrease rounds to zero is floating-point stagnation, not progress.
      if (F_next < F_x && F_next <= F_x - (cfg.sigma / (2.0 * t)) * step_sq) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      trace.termination = Termination::InnerFailure;
      break;
    }

    const Vector grad_next = obj.smooth.gradient(x_next);
    Vector w = (x - x_next) / t + grad_next - grad;

    IterateRecord rec;
    rec.k = k + 1;
    rec.x = x_next;
    rec.F_value = F_next;
    rec.step_norm = (x_next - x).norm();
    rec.L_k = 1.0 / t;
    rec.j_k = backtracks;
    rec.certificate_norm = w.norm();
    rec.prox_residual = stationarity_residual(obj, x_next, t_res);
    rec.inner_iterations = 1;
    rec.certificate = w;
    rec.inner_certificate = std::move(w);

    prev_x = std::move(x);
    prev_grad = std::move(grad);
    x = x_next;
    F_x = F_next;
    grad = grad_next;
    have_prev = true;
    residual = rec.prox_residual;
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace klprox
