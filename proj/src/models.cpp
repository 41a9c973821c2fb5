#include "klprox/models.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "klprox/rng.hpp"

namespace klprox {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + exp(u)) without overflow.
double softplus(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

// 1 / (1 + exp(m))
double neg_sigmoid(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

}  // namespace

Vector prox_l0(double t, double lambda, const Vector& z) {
  if (t <= 0.0 || lambda <= 0.0) {
    throw std::invalid_argument("prox_l0: t and lambda must be positive");
  }
  const double threshold = std::sqrt(2.0 * t * lambda);
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    out[i] = (std::abs(z[i]) > threshold) ? z[i] : 0.0;
  }
  return out;
}

Vector prox_l1(double t, double lambda, const Vector& z) {
  if (t <= 0.0 || lambda < 0.0) {
    throw std::invalid_argument("prox_l1: t must be positive, lambda >= 0");
  }
  const double shift = t * lambda;
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double mag = std::abs(z[i]) - shift;
    out[i] = mag > 0.0 ? (z[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

ProxRegularizer l0_regularizer(Index dim, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("l0_regularizer: lambda must be positive");
  ProxRegularizer g;
  g.dim = dim;
  g.value = [lambda](const Vector& x) {
    Index nnz = 0;
    for (Index i = 0; i < x.size(); ++i) nnz += (x[i] != 0.0);
    return lambda * static_cast<double>(nnz);
  };
  g.prox = [lambda](double t, const Vector& z) { return prox_l0(t, lambda, z); };
  g.domain_test = [](const Vector&) { return true; };
  return g;
}

ProxRegularizer l1_regularizer(Index dim, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("l1_regularizer: lambda must be positive");
  ProxRegularizer g;
  g.dim = dim;
  g.value = [lambda](const Vector& x) { return lambda * x.lpNorm<1>(); };
  g.prox = [lambda](double t, const Vector& z) { return prox_l1(t, lambda, z); };
  g.domain_test = [](const Vector&) { return true; };
  return g;
}

ProxRegularizer zero_regularizer(Index dim) {
  ProxRegularizer g;
  g.dim = dim;
  g.value = [](const Vector&) { return 0.0; };
  g.prox = [](double, const Vector& z) { return z; };
  g.domain_test = [](const Vector&) { return true; };
  return g;
}

ProxRegularizer box_regularizer(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size()) {
    throw std::invalid_argument("box_regularizer: bound dimensions differ");
  }
  if ((lo.array() > hi.array()).any()) {
    throw std::invalid_argument("box_regularizer: lo exceeds hi");
  }
  ProxRegularizer g;
  g.dim = lo.size();
  g.value = [lo, hi](const Vector& x) {
    const bool inside =
        (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    return inside ? 0.0 : kInf;
  };
  g.prox = [lo, hi](double, const Vector& z) {
    return z.cwiseMax(lo).cwiseMin(hi).eval();
  };
  g.domain_test = [lo, hi](const Vector& x) {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  };
  return g;
}

CompositeObjective logistic_l0_objective(const Matrix& A, const Vector& b,
                                         double mu, double lambda) {
  if (A.rows() != b.size()) {
    throw std::invalid_argument("logistic_l0_objective: A rows != label count");
  }
  if (mu <= 0.0 || lambda <= 0.0) {
    throw std::invalid_argument("logistic_l0_objective: mu and lambda must be positive");
  }
  for (Index i = 0; i < b.size(); ++i) {
    if (b[i] != 1.0 && b[i] != -1.0) {
      throw std::invalid_argument("logistic_l0_objective: labels must be +1 or -1");
    }
  }
  if (!all_finite(A)) {
    throw std::invalid_argument("logistic_l0_objective: non-finite data");
  }

  struct Data {
    Matrix A;
    Vector b;
    double mu;
    double inv_n;
  };
  auto d = std::make_shared<Data>(Data{A, b, mu, 1.0 / static_cast<double>(A.rows())});

  SmoothModel f;
  f.dim = A.cols();
  f.value = [d](const Vector& x) {
    const Vector margins = (d->A * x).cwiseProduct(d->b);
    double loss = 0.0;
    for (Index i = 0; i < margins.size(); ++i) loss += softplus(-margins[i]);
    return d->inv_n * loss + 0.5 * d->mu * x.squaredNorm();
  };
  f.gradient = [d](const Vector& x) {
    const Vector margins = (d->A * x).cwiseProduct(d->b);
    Vector coeff(margins.size());
    for (Index i = 0; i < margins.size(); ++i) {
      coeff[i] = -d->b[i] * neg_sigmoid(margins[i]);
    }
    return (d->inv_n * (d->A.transpose() * coeff) + d->mu * x).eval();
  };
  f.hess_vec = [d](const Vector& x, const Vector& v) {
    const Vector margins = (d->A * x).cwiseProduct(d->b);
    Vector weights(margins.size());
    for (Index i = 0; i < margins.size(); ++i) {
      const double p = neg_sigmoid(margins[i]);
      weights[i] = p * (1.0 - p);
    }
    const Vector Av = d->A * v;
    return (d->inv_n * (d->A.transpose() * weights.cwiseProduct(Av)) + d->mu * v)
        .eval();
  };
  f.full_hessian = [d](const Vector& x) {
    const Vector margins = (d->A * x).cwiseProduct(d->b);
    Vector weights(margins.size());
    for (Index i = 0; i < margins.size(); ++i) {
      const double p = neg_sigmoid(margins[i]);
      weights[i] = p * (1.0 - p);
    }
    Matrix H = d->inv_n * (d->A.transpose() * weights.asDiagonal() * d->A);
    H.diagonal().array() += d->mu;
    return H;
  };

  return CompositeObjective{std::move(f), l0_regularizer(A.cols(), lambda)};
}

namespace {

SmoothModel least_squares_model(const Matrix& A, const Vector& y) {
  if (A.rows() != y.size()) {
    throw std::invalid_argument("least_squares objective: A rows != y size");
  }
  if (!all_finite(A) || !all_finite(y)) {
    throw std::invalid_argument("least_squares objective: non-finite data");
  }
  struct Data {
    Matrix A;
    Vector y;
    Matrix AtA;
    Vector Aty;
  };
  auto d = std::make_shared<Data>(
      Data{A, y, A.transpose() * A, A.transpose() * y});

  SmoothModel f;
  f.dim = A.cols();
  f.value = [d](const Vector& x) { return 0.5 * (d->A * x - d->y).squaredNorm(); };
  f.gradient = [d](const Vector& x) { return (d->AtA * x - d->Aty).eval(); };
  f.hess_vec = [d](const Vector&, const Vector& v) { return (d->AtA * v).eval(); };
  f.full_hessian = [d](const Vector&) { return d->AtA; };
  return f;
}

}  // namespace

CompositeObjective least_squares_l0_objective(const Matrix& A, const Vector& y,
                                              double lambda) {
  return CompositeObjective{least_squares_model(A, y),
                            l0_regularizer(A.cols(), lambda)};
}

CompositeObjective least_squares_l1_objective(const Matrix& A, const Vector& y,
                                              double lambda) {
  return CompositeObjective{least_squares_model(A, y),
                            l1_regularizer(A.cols(), lambda)};
}

CompositeObjective quadratic_objective(const Matrix& Q, const Vector& c) {
  if (Q.rows() != Q.cols() || Q.rows() != c.size()) {
    throw std::invalid_argument("quadratic_objective: dimension mismatch");
  }
  struct Data {
    Matrix Q;
    Vector c;
  };
  auto d = std::make_shared<Data>(Data{0.5 * (Q + Q.transpose()), c});

  SmoothModel f;
  f.dim = c.size();
  f.value = [d](const Vector& x) {
    const Vector r = x - d->c;
    return 0.5 * r.dot(d->Q * r);
  };
  f.gradient = [d](const Vector& x) { return (d->Q * (x - d->c)).eval(); };
  f.hess_vec = [d](const Vector&, const Vector& v) { return (d->Q * v).eval(); };
  f.full_hessian = [d](const Vector&) { return d->Q; };
  return CompositeObjective{std::move(f), zero_regularizer(c.size())};
}

DerivativeReport check_derivatives(const SmoothModel& model, const Vector& x,
                                   double h, int n_directions,
                                   std::uint64_t seed) {
  DerivativeReport report;
  const Vector g = model.gradient(x);

  Vector xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double fd = (model.value(xp) - model.value(xm)) / (2.0 * h);
    const double err = std::abs(fd - g[i]) / (1.0 + std::abs(g[i]));
    report.max_gradient_error = std::max(report.max_gradient_error, err);
    xp[i] = x[i];
    xm[i] = x[i];
  }

  Xoshiro256 rng(seed);
  for (int dir = 0; dir < n_directions; ++dir) {
    Vector v(x.size());
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    const double norm = v.norm();
    if (norm == 0.0) continue;
    v /= norm;
    const Vector hv = model.hess_vec(x, v);
    const Vector fd = (model.gradient(x + h * v) - model.gradient(x - h * v)) / (2.0 * h);
    for (Index i = 0; i < v.size(); ++i) {
      const double err = std::abs(fd[i] - hv[i]) / (1.0 + std::abs(hv[i]));
      report.max_hess_vec_error = std::max(report.max_hess_vec_error, err);
    }
  }
  return report;
}

}  // namespace klprox
