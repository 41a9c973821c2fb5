#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "klprox/types.hpp"

namespace klprox {

/// Evaluator bundle for the smooth part f of F = f + g.
///
/// `hess_vec` applies the Hessian at a point to a direction; `full_hessian`
/// is optional and only used by small-scale oracles.
struct SmoothModel {
  Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&, const Vector&)> hess_vec;
  std::function<Matrix(const Vector&)> full_hessian;  // may be empty

  bool has_full_hessian() const { return static_cast<bool>(full_hessian); }
};

/// Evaluator bundle for the nonsmooth part g. `value` returns +inf outside
/// dom g; `prox(t, z)` minimizes u -> 0.5*|u-z|^2 + t*g(u).
struct ProxRegularizer {
  Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(double, const Vector&)> prox;
  std::function<bool(const Vector&)> domain_test;
};

struct CompositeObjective {
  SmoothModel smooth;
  ProxRegularizer regularizer;

  double value(const Vector& x) const {
    return smooth.value(x) + regularizer.value(x);
  }
};

/// Hard-thresholding prox of g = lambda*||.||_0. Per coordinate the output is
/// z_i when z_i^2 > 2*t*lambda and 0 otherwise; the tie goes to 0.
Vector prox_l0(double t, double lambda, const Vector& z);

/// Soft-thresholding prox of g = lambda*||.||_1.
Vector prox_l1(double t, double lambda, const Vector& z);

ProxRegularizer l0_regularizer(Index dim, double lambda);
ProxRegularizer l1_regularizer(Index dim, double lambda);
ProxRegularizer zero_regularizer(Index dim);
/// Indicator of the box [lo, hi]; prox is the projection.
ProxRegularizer box_regularizer(const Vector& lo, const Vector& hi);

/// f(x) = (1/n) sum_i log(1 + exp(-b_i <a_i, x>)) + (mu/2)|x|^2,
/// g = lambda*||.||_0. Labels must be exactly +1 or -1.
CompositeObjective logistic_l0_objective(const Matrix& A, const Vector& b,
                                         double mu, double lambda);

/// f(x) = 0.5*|Ax - y|^2, g = lambda*||.||_0.
CompositeObjective least_squares_l0_objective(const Matrix& A, const Vector& y,
                                              double lambda);

/// f(x) = 0.5*|Ax - y|^2, g = lambda*||.||_1.
CompositeObjective least_squares_l1_objective(const Matrix& A, const Vector& y,
                                              double lambda);

/// f(x) = 0.5*<x-c, Q(x-c)>, g = 0. Q must be square and is symmetrized.
CompositeObjective quadratic_objective(const Matrix& Q, const Vector& c);

struct DerivativeReport {
  double max_gradient_error = 0.0;  // gradient vs central differences of value
  double max_hess_vec_error = 0.0;  // hess_vec vs central differences of gradient
};

/// Central finite-difference check of the model's derivatives at x. The
/// Hessian check uses `n_directions` seeded random unit directions. Errors
/// are relative: |fd - analytic| / (1 + |analytic|), worst case over entries.
DerivativeReport check_derivatives(const SmoothModel& model, const Vector& x,
                                   double h, int n_directions = 5,
                                   std::uint64_t seed = 42);

}  // namespace klprox
