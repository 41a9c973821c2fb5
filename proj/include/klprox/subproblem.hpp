#pragma once

#include <optional>

#include "klprox/models.hpp"

namespace klprox {

/// The q-order regularized model built around a center point x^k:
///   Ftilde(x) = <grad, x - c> + 0.5*<H (x - c), x - c>
///             + (L/q)*|x - c|^q + g(x).
struct SubproblemSpec {
  ProxRegularizer reg;
  Vector center;
  Vector grad_at_center;
  std::function<Vector(const Vector&)> hess_vec_at_center;
  double L = 1.0;  // regularization weight L_{k,j}
  double q = 3.0;  // in [2, 3]
  double b = 1.0;  // inexactness constant
};

struct SubproblemResult {
  Vector point;
  Vector certificate;  // member of the model subdifferential at `point`
  double certificate_norm = 0.0;
  double model_value = 0.0;
  int inner_iterations = 0;
};

/// Ftilde(x) minus the constant f(x^k); +inf outside dom g.
double model_value(const SubproblemSpec& spec, const Vector& x);

/// Gradient of the smooth part of Ftilde. The q-term contributes
/// L*|x-c|^(q-2)*(x-c), which is 0 at x = c for every q >= 2.
Vector model_smooth_gradient(const SubproblemSpec& spec, const Vector& x);

struct PgStepResult {
  Vector x_next;
  Vector w;  // subgradient certificate at x_next from the prox optimality
};

/// One proximal-gradient step on the model from x with step size t.
/// w = (x - x_next)/t + smooth_grad(x_next) - smooth_grad(x).
PgStepResult pg_step(const SubproblemSpec& spec, const Vector& x, double t);

struct SubproblemOptions {
  int max_inner = 2000;
  std::optional<Vector> warm_start;  // defaults to the center
};

/// Monotone proximal-gradient loop with one-step extrapolation. Returns the
/// first iterate whose certificate passes
///   |w| <= b*L*|x - c|^(q-1)   and   Ftilde(x) <= Ftilde(c),
/// or nullopt when the inner budget is exhausted; an uncertified point is
/// never returned.
std::optional<SubproblemResult> solve(const SubproblemSpec& spec,
                                      const SubproblemOptions& opts);

/// Largest-eigenvalue estimate of a symmetric operator by a few seeded
/// power-iteration steps.
double estimate_operator_norm(
    const std::function<Vector(const Vector&)>& apply, Index dim,
    int iters = 5, std::uint64_t seed = 7);

}  // namespace klprox
