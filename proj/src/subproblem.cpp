#include "klprox/subproblem.hpp"

#include <cmath>
#include <limits>

#include "klprox/rng.hpp"

namespace klprox {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double model_value(const SubproblemSpec& spec, const Vector& x) {
  const double gx = spec.reg.value(x);
  if (!std::isfinite(gx)) return kInf;
  const Vector d = x - spec.center;
  const double quad = spec.grad_at_center.dot(d) +
                      0.5 * d.dot(spec.hess_vec_at_center(d));
  const double dist = d.norm();
  const double reg_term =
      dist > 0.0 ? (spec.L / spec.q) * std::pow(dist, spec.q) : 0.0;
  return quad + reg_term + gx;
}

Vector model_smooth_gradient(const SubproblemSpec& spec, const Vector& x) {
  const Vector d = x - spec.center;
  Vector g = spec.grad_at_center + spec.hess_vec_at_center(d);
  const double dist = d.norm();
  if (dist > 0.0) g += spec.L * std::pow(dist, spec.q - 2.0) * d;
  return g;
}

PgStepResult pg_step(const SubproblemSpec& spec, const Vector& x, double t) {
  if (t <= 0.0) throw std::invalid_argument("pg_step: t must be positive");
  const Vector grad_x = model_smooth_gradient(spec, x);
  Vector x_next = spec.reg.prox(t, x - t * grad_x);
  Vector w = (x - x_next) / t + model_smooth_gradient(spec, x_next) - grad_x;
  return {std::move(x_next), std::move(w)};
}

double estimate_operator_norm(
    const std::function<Vector(const Vector&)>& apply, Index dim, int iters,
    std::uint64_t seed) {
  if (dim <= 0) return 0.0;
  Xoshiro256 rng(seed);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = rng.normal();
  double norm = v.norm();
  if (norm == 0.0) return 0.0;
  v /= norm;
  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector av = apply(v);
    estimate = av.norm();
    if (estimate <= 0.0 || !std::isfinite(estimate)) return 0.0;
    v = av / estimate;
  }
  return estimate;
}

std::optional<SubproblemResult> solve(const SubproblemSpec& spec,
                                      const SubproblemOptions& opts) {
  if (opts.max_inner < 1) {
    throw std::invalid_argument("subproblem solve: max_inner must be >= 1");
  }
  if (spec.q < 2.0 || spec.q > 3.0 || spec.L <= 0.0 || spec.b <= 0.0) {
    throw std::invalid_argument("subproblem solve: need q in [2,3], L > 0, b > 0");
  }

  const double center_value = model_value(spec, spec.center);

  Vector x = spec.center;
  if (opts.warm_start && opts.warm_start->size() == spec.center.size()) {
    Vector warm = *opts.warm_start;
    if (!spec.reg.domain_test(warm)) warm = spec.reg.prox(1.0, warm);
    // A warm start above the center value would break the monotone route to
    // the model-decrease certificate; fall back to the center in that case.
    if (model_value(spec, warm) <= center_value) x = std::move(warm);
  }

  const double curvature =
      estimate_operator_norm(spec.hess_vec_at_center, spec.center.size());
  const auto step_proxy = [&](double dist) {
    const double lipschitz =
        curvature + spec.L * std::pow(dist, spec.q - 2.0);
    return 1.0 / std::max(lipschitz, 1e-12);
  };
  const double start_dist = (x - spec.center).norm();
  double t = step_proxy(std::max(start_dist, 1.0));

  Vector x_prev = x;
  double fx = model_value(spec, x);
  constexpr int kMaxBacktracks = 80;

  for (int i = 0; i < opts.max_inner; ++i) {
    // The model's gradient Lipschitz constant shrinks with the displacement;
    // let t recover accordingly, with backtracking guarding the increase.
    t = std::max(t, step_proxy((x - spec.center).norm()));
    const double beta = i >= 1 ? (i - 1.0) / (i + 2.0) : 0.0;

    Vector candidate;
    Vector certificate;
    double candidate_value = kInf;
    bool have_candidate = false;

    if (beta > 0.0) {
      const Vector extrapolated = x + beta * (x - x_prev);
      PgStepResult ext = pg_step(spec, extrapolated, t);
      const double ext_value = model_value(spec, ext.x_next);
      if (ext_value <= fx) {
        candidate = std::move(ext.x_next);
        certificate = std::move(ext.w);
        candidate_value = ext_value;
        have_candidate = true;
      }
    }

    if (!have_candidate) {
      // Plain monotone PG step; halve t until the model value stops rising.
      for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
        PgStepResult plain = pg_step(spec, x, t);
        const double value = model_value(spec, plain.x_next);
        if (value <= fx) {
          candidate = std::move(plain.x_next);
          certificate = std::move(plain.w);
          candidate_value = value;
          have_candidate = true;
          break;
        }
        t *= 0.5;
      }
      if (!have_candidate) return std::nullopt;
    }

    x_prev = std::move(x);
    x = std::move(candidate);
    fx = candidate_value;

    const double step_from_center = (x - spec.center).norm();
    const double cert_norm = certificate.norm();
    const double bound = spec.b * spec.L * std::pow(step_from_center, spec.q - 1.0);
    if (cert_norm <= bound && fx <= center_value) {
      SubproblemResult result;
      result.point = x;
      result.certificate = std::move(certificate);
      result.certificate_norm = cert_norm;
      result.model_value = fx;
      result.inner_iterations = i;
      return result;
    }
  }
  return std::nullopt;
}

}  // namespace klprox
