#include <doctest.h>

#include <cmath>
#include <limits>

#include "klprox/models.hpp"
#include "klprox/rng.hpp"

using namespace klprox;

namespace {

// Independent prox oracle for separable g: minimize the scalar prox objective
// over an explicit candidate set.
double scalar_prox_objective(double u, double z, double t, double g_of_u) {
  return 0.5 * (u - z) * (u - z) + t * g_of_u;
}

double oracle_prox_l0_coord(double t, double lambda, double z) {
  const double keep = scalar_prox_objective(z, z, t, z != 0.0 ? lambda : 0.0);
  const double drop = scalar_prox_objective(0.0, z, t, 0.0);
  return keep < drop ? z : 0.0;  // tie goes to the sparser point
}

Vector random_vector(Xoshiro256& rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("prox_l0 matches the stated examples") {
  Vector z(2);
  z << 0.5, 0.3;
  const Vector out = prox_l0(1.0, 0.1, z);  // threshold sqrt(0.2) ~ 0.4472
  CHECK(out[0] == 0.5);
  CHECK(out[1] == 0.0);

  const Vector zero = prox_l0(1.0, 0.1, Vector::Zero(3));
  CHECK(zero.isZero(0.0));

  Vector tie(1);
  tie << 0.4;  // threshold sqrt(2*1*0.08) = 0.4 exactly
  CHECK(prox_l0(1.0, 0.08, tie)[0] == 0.0);
}

TEST_CASE("prox_l1 matches the stated examples") {
  Vector z(2);
  z << 0.5, -0.1;
  const Vector out = prox_l1(1.0, 0.2, z);
  CHECK(out[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(out[1] == 0.0);

  Vector w(3);
  w << 0.7, -1.2, 0.0;
  const Vector near_identity = prox_l1(1.0, 1e-300, w);
  CHECK((near_identity - w).norm() < 1e-12);

  Vector boundary(1);
  boundary << 0.2;
  CHECK(prox_l1(1.0, 0.2, boundary)[0] == 0.0);
}

TEST_CASE("prox_l0 agrees with the candidate oracle on random triples") {
  Xoshiro256 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const double t = 0.05 + 2.0 * rng.uniform();
    const double lambda = 0.01 + rng.uniform();
    const Vector z = random_vector(rng, 6);
    const Vector out = prox_l0(t, lambda, z);
    for (Index i = 0; i < z.size(); ++i) {
      CHECK(out[i] == oracle_prox_l0_coord(t, lambda, z[i]));
    }
  }
}

TEST_CASE("separable proxes beat a 1001-point grid per coordinate") {
  Xoshiro256 rng(77);
  auto grid_check = [&](auto&& prox_out, auto&& g_scalar, double t, double z) {
    const double attained =
        scalar_prox_objective(prox_out, z, t, g_scalar(prox_out));
    const double span = 2.0 * std::abs(z);
    for (int i = 0; i <= 1000; ++i) {
      const double u = -span + 2.0 * span * i / 1000.0;
      CHECK(attained <=
            scalar_prox_objective(u, z, t, g_scalar(u)) + 1e-12);
    }
    CHECK(attained <= scalar_prox_objective(0.0, z, t, g_scalar(0.0)) + 1e-12);
    CHECK(attained <= scalar_prox_objective(z, z, t, g_scalar(z)) + 1e-12);
  };

  for (int trial = 0; trial < 25; ++trial) {
    const double t = 0.1 + rng.uniform();
    const double lambda = 0.05 + rng.uniform();
    const Vector z = random_vector(rng, 4);

    const Vector l0 = prox_l0(t, lambda, z);
    const Vector l1 = prox_l1(t, lambda, z);
    for (Index i = 0; i < z.size(); ++i) {
      grid_check(l0[i], [&](double u) { return u != 0.0 ? lambda : 0.0; }, t, z[i]);
      grid_check(l1[i], [&](double u) { return lambda * std::abs(u); }, t, z[i]);
    }
  }
}

TEST_CASE("prox_l1 output satisfies the subgradient optimality condition") {
  Xoshiro256 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double t = 0.1 + rng.uniform();
    const double lambda = 0.05 + rng.uniform();
    const Vector z = random_vector(rng, 5);
    const Vector u = prox_l1(t, lambda, z);
    for (Index i = 0; i < z.size(); ++i) {
      if (u[i] != 0.0) {
        const double sign = u[i] > 0.0 ? 1.0 : -1.0;
        CHECK(std::abs(u[i] - z[i] + t * lambda * sign) < 1e-12);
      } else {
        CHECK(std::abs(z[i]) <= t * lambda + 1e-12);
      }
    }
  }
}

TEST_CASE("logistic objective at the stated points") {
  Matrix A(1, 1);
  A << 1.0;
  Vector b(1);
  b << 1.0;
  const auto obj = logistic_l0_objective(A, b, 1e-12, 0.1);

  Vector x0 = Vector::Zero(1);
  CHECK(obj.smooth.value(x0) == doctest::Approx(std::log(2.0)).epsilon(1e-10));

  // Central finite-difference gradient oracle at 0.
  const double h = 1e-6;
  Vector xp(1), xm(1);
  xp << h;
  xm << -h;
  const double fd = (obj.smooth.value(xp) - obj.smooth.value(xm)) / (2.0 * h);
  CHECK(fd == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(obj.smooth.gradient(x0)[0] == doctest::Approx(-0.5).epsilon(1e-9));

  Vector sparse(2);
  sparse << 0.0, 0.3;
  const auto g = l0_regularizer(2, 0.1);
  CHECK(g.value(sparse) == doctest::Approx(0.1));
}

TEST_CASE("logistic objective rejects bad inputs") {
  Matrix A(2, 2);
  A.setOnes();
  Vector b3(3);
  b3.setOnes();
  CHECK_THROWS_AS(logistic_l0_objective(A, b3, 1e-3, 0.1), std::invalid_argument);

  Vector bad_labels(2);
  bad_labels << 1.0, 0.5;
  CHECK_THROWS_AS(logistic_l0_objective(A, bad_labels, 1e-3, 0.1),
                  std::invalid_argument);
}

TEST_CASE("logistic smooth part dominates the ridge term") {
  Xoshiro256 rng(11);
  Matrix A(20, 4);
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
  }
  Vector b(20);
  for (Index i = 0; i < b.size(); ++i) b[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const double mu = 0.37;
  const auto obj = logistic_l0_objective(A, b, mu, 0.1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_vector(rng, 4, 3.0);
    CHECK(obj.smooth.value(x) >= 0.5 * mu * x.squaredNorm());
  }
}

TEST_CASE("least squares objective at the stated points") {
  Matrix A = Matrix::Identity(2, 2);
  Vector y(2);
  y << 1.0, 1.0;
  const auto obj = least_squares_l0_objective(A, y, 0.1);

  Vector x(2);
  x << 1.0, 1.0;
  CHECK(obj.value(x) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(obj.smooth.gradient(Vector::Zero(2)).isApprox(-y, 1e-14));

  Vector ybad(3);
  CHECK_THROWS_AS(least_squares_l0_objective(A, ybad, 0.1),
                  std::invalid_argument);
}

TEST_CASE("hess_vec is symmetric on random pairs") {
  Xoshiro256 rng(99);
  Matrix A(15, 6);
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
  }
  Vector b(15);
  for (Index i = 0; i < b.size(); ++i) b[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const auto obj = logistic_l0_objective(A, b, 1e-3, 0.1);

  const Vector x = random_vector(rng, 6);
  for (int pair = 0; pair < 100; ++pair) {
    const Vector u = random_vector(rng, 6);
    const Vector v = random_vector(rng, 6);
    const double huv = obj.smooth.hess_vec(x, u).dot(v);
    const double hvu = obj.smooth.hess_vec(x, v).dot(u);
    CHECK(std::abs(huv - hvu) <= 1e-10 * (1.0 + u.norm() * v.norm()));
  }
}

TEST_CASE("check_derivatives on the stated cases") {
  SUBCASE("quadratic is exact under central differences") {
    Matrix Q(3, 3);
    Q << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const auto obj = quadratic_objective(Q, Vector::Zero(3));
    Xoshiro256 rng(1);
    const auto report =
        check_derivatives(obj.smooth, random_vector(rng, 3), 1e-4);
    CHECK(report.max_gradient_error <= 1e-10);
  }

  SUBCASE("logistic at a random point") {
    Xoshiro256 rng(13);
    Matrix A(30, 5);
    for (Index i = 0; i < A.rows(); ++i) {
      for (Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
    }
    Vector b(30);
    for (Index i = 0; i < b.size(); ++i) {
      b[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    const auto obj = logistic_l0_objective(A, b, 1e-5, 0.1);
    const auto report =
        check_derivatives(obj.smooth, random_vector(rng, 5), 1e-6);
    CHECK(report.max_gradient_error <= 1e-6);
    CHECK(report.max_hess_vec_error <= 1e-5);
  }

  SUBCASE("zero function has zero errors") {
    SmoothModel zero;
    zero.dim = 3;
    zero.value = [](const Vector&) { return 0.0; };
    zero.gradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
    zero.hess_vec = [](const Vector& x, const Vector&) {
      return Vector::Zero(x.size()).eval();
    };
    const auto report = check_derivatives(zero, Vector::Ones(3), 1e-6);
    CHECK(report.max_gradient_error == 0.0);
    CHECK(report.max_hess_vec_error == 0.0);
  }
}

TEST_CASE("hess_vec agrees with finite differences of the gradient") {
  Xoshiro256 rng(21);
  Matrix A(12, 4);
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
  }
  Vector y = random_vector(rng, 12);
  const auto obj = least_squares_l0_objective(A, y, 0.2);
  const auto report =
      check_derivatives(obj.smooth, random_vector(rng, 4), 1e-6);
  CHECK(report.max_hess_vec_error <= 1e-5);
}

TEST_CASE("box regularizer projects and reports its domain") {
  const Vector lo = Vector::Constant(2, 0.0);
  const Vector hi = Vector::Constant(2, 1.0);
  const auto g = box_regularizer(lo, hi);
  Vector z(2);
  z << -0.5, 2.0;
  const Vector projected = g.prox(1.0, z);
  CHECK(projected[0] == 0.0);
  CHECK(projected[1] == 1.0);
  CHECK(g.value(projected) == 0.0);
  CHECK(g.value(z) == std::numeric_limits<double>::infinity());
  CHECK(!g.domain_test(z));
}
