#pragma once

#include <string>
#include <vector>

#include "klprox/subproblem.hpp"

namespace klprox {

struct SolverConfig {
  double epsilon = 1e-8;  // stationarity tolerance
  double b = 1.0;         // inexactness constant of the subproblem criteria
  double q = 3.0;         // regularization order, in [2, 3]
  double tau = 2.0;       // L escalation factor, > 1
  double L_min = 1e-3;
  double L_max = 1e3;
  double delta = 0.5;  // sufficient-decrease fraction, in (0, 1)
  int max_outer = 500;
  int max_inner = 2000;
  int max_j = 60;  // L-escalation budget per outer step

  void validate() const;  // throws std::invalid_argument
};

enum class Termination { Stationary, MaxOuter, InnerFailure };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct IterateRecord {
  int k = 0;
  Vector x;
  double F_value = 0.0;
  double step_norm = 0.0;  // |x^k - x^{k-1}|, 0 at k = 0
  double L_k = 0.0;
  int j_k = 0;
  double certificate_norm = 0.0;  // |w^k|
  double prox_residual = 0.0;
  int inner_iterations = 0;
  // Full vectors, kept in memory for certificate re-validation. The CSV
  // persistence stores only the scalars above (x optionally in a sidecar).
  Vector certificate;        // w^k, member of dF(x^k)
  Vector inner_certificate;  // wtilde^k, member of the model subdifferential
};

struct Trace {
  std::vector<IterateRecord> records;
  SolverConfig config;
  Termination termination = Termination::MaxOuter;
};

/// Barzilai-Borwein initialization of the regularization weight from the
/// Hessian difference along the last step, clamped to [L_min, L_max].
/// Degenerate inputs (zero step, vanishing curvature pairing) give L_min.
double bb_initialize(const SmoothModel& f, const Vector& prev_x,
                     const Vector& x, double L_min, double L_max);

/// |x - prox_{t g}(x - t grad f(x))| / t at a fixed scale t = t_res.
/// Zero exactly at prox-stationary points of F at that scale.
double stationarity_residual(const CompositeObjective& obj, const Vector& x,
                             double t_res);

/// One outer step of the q-order regularized proximal Newton method:
/// escalates L until the inexact subproblem solution passes the
/// sufficient-decrease test. Returns nullopt when the escalation budget is
/// exhausted. The record's prox_residual is left at 0 for the caller.
std::optional<IterateRecord> step(const CompositeObjective& obj,
                                  const Vector& x, double L_k0,
                                  const SolverConfig& cfg,
                                  const std::optional<Vector>& warm_start = {});

/// Full outer loop: BB initialization + step until the prox residual falls
/// below epsilon or a budget is hit.
Trace run(const CompositeObjective& obj, const Vector& x0,
          const SolverConfig& cfg);

struct PgConfig {
  double epsilon = 1e-8;
  double sigma = 2e-4;  // sufficient-decrease constant of the line search
  int max_outer = 20000;
  double t_min = 1e-12;
  double t_max = 1e12;
  int max_backtracks = 60;
};

/// Monotone line-search proximal gradient baseline with BB step
/// initialization. Records the same trace shape; its certificates satisfy
/// H1-H2 with p = 1.
Trace pg_baseline_run(const CompositeObjective& obj, const Vector& x0,
                      const PgConfig& cfg);

}  // namespace klprox
