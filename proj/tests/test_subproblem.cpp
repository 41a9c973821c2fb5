#include <doctest.h>

#include <cmath>

#include "klprox/rng.hpp"
#include "klprox/subproblem.hpp"

using namespace klprox;

namespace {

SubproblemSpec scalar_quadratic_spec(double grad_at_center, double curvature,
                                     double center, double L, double q) {
  SubproblemSpec spec;
  spec.reg = zero_regularizer(1);
  spec.center = Vector::Constant(1, center);
  spec.grad_at_center = Vector::Constant(1, grad_at_center);
  spec.hess_vec_at_center = [curvature](const Vector& v) {
    return (curvature * v).eval();
  };
  spec.L = L;
  spec.q = q;
  spec.b = 1.0;
  return spec;
}

Vector random_vector(Xoshiro256& rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

SubproblemSpec random_spec(Xoshiro256& rng, Index dim, double q, bool use_l0) {
  Matrix B(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) B(i, j) = rng.normal();
  }
  const Matrix H = B.transpose() * B / double(dim);
  SubproblemSpec spec;
  spec.reg = use_l0 ? l0_regularizer(dim, 0.05) : zero_regularizer(dim);
  spec.center = random_vector(rng, dim);
  spec.grad_at_center = random_vector(rng, dim);
  spec.hess_vec_at_center = [H](const Vector& v) { return (H * v).eval(); };
  spec.L = 0.5 + 4.0 * rng.uniform();
  spec.q = q;
  spec.b = 1.0;
  return spec;
}

}  // namespace

TEST_CASE("model_value at the stated points") {
  SUBCASE("value at the center is g(center)") {
    auto spec = scalar_quadratic_spec(3.0, 2.0, 0.7, 1.5, 3.0);
    CHECK(model_value(spec, spec.center) == 0.0);

    SubproblemSpec l0spec = spec;
    l0spec.reg = l0_regularizer(1, 0.25);
    CHECK(model_value(l0spec, l0spec.center) == doctest::Approx(0.25));
  }

  SUBCASE("scalar quadratic arithmetic") {
    // f(x) = x^2/2 at center 1: grad 1, curvature 1; L = 1, q = 2, x = 0:
    // -1 + 0.5 + 0.5 = 0.
    auto spec = scalar_quadratic_spec(1.0, 1.0, 1.0, 1.0, 2.0);
    CHECK(model_value(spec, Vector::Zero(1)) == doctest::Approx(0.0));
  }

  SUBCASE("l0 term plus cubic regularization") {
    SubproblemSpec spec;
    spec.reg = l0_regularizer(2, 0.1);
    spec.center = Vector::Zero(2);
    spec.grad_at_center = Vector::Zero(2);
    spec.hess_vec_at_center = [](const Vector& v) {
      return Vector::Zero(v.size()).eval();
    };
    spec.L = 3.0;
    spec.q = 3.0;
    spec.b = 1.0;
    Vector x(2);
    x << 1.0, 0.0;
    CHECK(model_value(spec, x) == doctest::Approx(1.1));
  }

  SUBCASE("outside dom g the value is +inf, not an error") {
    SubproblemSpec spec;
    spec.reg = box_regularizer(Vector::Zero(1), Vector::Ones(1));
    spec.center = Vector::Constant(1, 0.5);
    spec.grad_at_center = Vector::Zero(1);
    spec.hess_vec_at_center = [](const Vector& v) {
      return Vector::Zero(v.size()).eval();
    };
    spec.L = 1.0;
    spec.q = 2.0;
    spec.b = 1.0;
    CHECK(std::isinf(model_value(spec, Vector::Constant(1, 2.0))));
  }
}

TEST_CASE("model_smooth_gradient at the stated points") {
  SUBCASE("gradient at the center is the frozen gradient, any q in [2,3]") {
    for (double q : {2.0, 2.5, 3.0}) {
      auto spec = scalar_quadratic_spec(0.37, 2.0, 1.0, 5.0, q);
      CHECK(model_smooth_gradient(spec, spec.center)[0] == 0.37);
    }
  }

  SUBCASE("scalar arithmetic") {
    auto spec = scalar_quadratic_spec(1.0, 1.0, 1.0, 1.0, 2.0);
    CHECK(model_smooth_gradient(spec, Vector::Zero(1))[0] ==
          doctest::Approx(-1.0));
  }

  SUBCASE("pure cubic term") {
    SubproblemSpec spec;
    spec.reg = zero_regularizer(2);
    spec.center = Vector::Zero(2);
    spec.grad_at_center = Vector::Zero(2);
    spec.hess_vec_at_center = [](const Vector& v) {
      return Vector::Zero(v.size()).eval();
    };
    spec.L = 1.0;
    spec.q = 3.0;
    spec.b = 1.0;
    Vector x(2);
    x << 2.0, 0.0;
    const Vector g = model_smooth_gradient(spec, x);
    CHECK(g[0] == doctest::Approx(4.0));
    CHECK(g[1] == 0.0);
  }
}

TEST_CASE("pg_step properties") {
  SUBCASE("fixed point gives zero certificate") {
    auto spec = scalar_quadratic_spec(0.0, 1.0, 0.0, 1.0, 2.0);
    const auto res = pg_step(spec, spec.center, 0.5);
    CHECK(res.x_next[0] == 0.0);
    CHECK(res.w.norm() == 0.0);
  }

  SUBCASE("g = 0 reduces to an explicit gradient step") {
    auto spec = scalar_quadratic_spec(1.0, 1.0, 1.0, 1.0, 2.0);
    Vector x = Vector::Constant(1, 0.3);
    const double t = 0.2;
    const auto res = pg_step(spec, x, t);
    const Vector expected = x - t * model_smooth_gradient(spec, x);
    CHECK(res.x_next.isApprox(expected, 1e-15));
  }

  SUBCASE("unit-curvature quadratic model: one step lands on the minimizer") {
    // Total smooth curvature 1 = Hessian 0.5 + (q=2) L 0.5; minimizer is
    // center - grad.
    auto spec = scalar_quadratic_spec(0.8, 0.5, 1.0, 0.5, 2.0);
    const Vector start = Vector::Constant(1, -2.0);
    const auto res = pg_step(spec, start, 1.0);
    CHECK(res.x_next[0] == doctest::Approx(1.0 - 0.8));
    CHECK(model_smooth_gradient(spec, res.x_next).norm() <= 1e-14);
    CHECK(res.w.norm() <= 1e-14);
  }

  SUBCASE("certificate re-derives from the prox optimality condition") {
    Xoshiro256 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      const double q = 2.0 + rng.uniform();
      auto spec = random_spec(rng, 5, q, trial % 2 == 0);
      const Vector x = random_vector(rng, 5);
      const double t = 0.05 + rng.uniform();
      const auto res = pg_step(spec, x, t);
      const Vector rebuilt = (x - res.x_next) / t +
                             model_smooth_gradient(spec, res.x_next) -
                             model_smooth_gradient(spec, x);
      CHECK((rebuilt - res.w).norm() <= 1e-10);
    }
  }
}

TEST_CASE("solve on the stated cases") {
  SUBCASE("exact scalar quadratic minimizer") {
    // f(x) = x^2/2 with center 1, g = 0, q = 2, L = 1: Ftilde minimized at
    // 0.5 (scalar calculus oracle), certificate ~0 at the exact solve.
    auto spec = scalar_quadratic_spec(1.0, 1.0, 1.0, 1.0, 2.0);
    const auto res = solve(spec, {});
    REQUIRE(res.has_value());
    CHECK(res->point[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res->model_value == doctest::Approx(-0.25).epsilon(1e-9));
  }

  SUBCASE("stationary center returns immediately") {
    auto spec = scalar_quadratic_spec(0.0, 1.0, 2.0, 1.0, 2.0);
    const auto res = solve(spec, {});
    REQUIRE(res.has_value());
    CHECK(res->point[0] == 2.0);
    CHECK(res->inner_iterations == 0);
    CHECK(res->certificate_norm == 0.0);
  }

  SUBCASE("l0 model with global minimizer at the center") {
    SubproblemSpec spec;
    spec.reg = l0_regularizer(2, 0.1);
    spec.center = Vector::Zero(2);
    spec.grad_at_center = Vector::Zero(2);
    spec.hess_vec_at_center = [](const Vector& v) {
      return Vector::Zero(v.size()).eval();
    };
    spec.L = 3.0;
    spec.q = 3.0;
    spec.b = 1.0;
    const auto res = solve(spec, {});
    REQUIRE(res.has_value());
    CHECK(res->point.isZero(0.0));
    CHECK(res->certificate_norm == 0.0);
  }

  SUBCASE("tiny budget reports exhaustion instead of an uncertified point") {
    // Ill-conditioned curvature keeps one PG step far from certifiable when
    // b is tiny.
    SubproblemSpec spec;
    spec.reg = zero_regularizer(2);
    spec.center = Vector::Zero(2);
    spec.grad_at_center = Vector::Constant(2, 5.0);
    spec.hess_vec_at_center = [](const Vector& v) {
      Vector out(2);
      out << v[0], 100.0 * v[1];
      return out;
    };
    spec.L = 1e-6;
    spec.q = 2.0;
    spec.b = 1e-12;
    SubproblemOptions opts;
    opts.max_inner = 1;
    CHECK(!solve(spec, opts).has_value());
  }
}

TEST_CASE("solve output always satisfies the inexactness criteria") {
  Xoshiro256 rng(57);
  for (int trial = 0; trial < 60; ++trial) {
    const double q = trial % 3 == 0 ? 2.0 : (trial % 3 == 1 ? 2.5 : 3.0);
    auto spec = random_spec(rng, 6, q, trial % 2 == 1);
    SubproblemOptions opts;
    opts.max_inner = 5000;
    if (trial % 5 == 0) {
      opts.warm_start = random_vector(rng, 6, 0.5);
    }
    const auto res = solve(spec, opts);
    REQUIRE(res.has_value());

    const double step = (res->point - spec.center).norm();
    CHECK(res->certificate_norm <=
          spec.b * spec.L * std::pow(step, spec.q - 1.0) + 1e-12);
    CHECK(res->model_value <= model_value(spec, spec.center) + 1e-12);
    CHECK(res->certificate_norm ==
          doctest::Approx(res->certificate.norm()).epsilon(1e-12));
    CHECK(res->model_value ==
          doctest::Approx(model_value(spec, res->point)).epsilon(1e-9));
  }
}

TEST_CASE("monotone PG iterations never increase the model value") {
  Xoshiro256 rng(83);
  auto spec = random_spec(rng, 8, 3.0, true);
  Vector x = spec.center;
  double value = model_value(spec, x);
  double t = 0.5;
  for (int i = 0; i < 40; ++i) {
    PgStepResult step = pg_step(spec, x, t);
    double next_value = model_value(spec, step.x_next);
    int guard = 0;
    while (next_value > value && guard++ < 60) {
      t *= 0.5;
      step = pg_step(spec, x, t);
      next_value = model_value(spec, step.x_next);
    }
    CHECK(next_value <= value + 1e-15);
    x = step.x_next;
    value = next_value;
  }
}
