"""Composite optimization with an inexact q-order regularized proximal
Newton method, a proximal-gradient baseline, and empirical verification of
the H1-H2 convergence framework."""

from ._core import (
    CompositeObjective,
    ConditionCheck,
    DataSet,
    DerivativeReport,
    EmptyFileError,
    FrameworkReport,
    IterateRecord,
    ParseError,
    PgConfig,
    RateReport,
    Regime,
    SolverConfig,
    SyntheticKLProblem,
    Termination,
    TooShortError,
    ThetaOutOfRegime,
    Trace,
    Violation,
    check_derivatives,
    check_h1,
    check_h2,
    estimate_q_order,
    fit_constants,
    gen_least_squares_data,
    gen_logistic_data,
    iterate_errors,
    least_squares_l0_objective,
    least_squares_l1_objective,
    logistic_l0_objective,
    objective_value_order,
    pg_baseline_run,
    predicted_order,
    prox_l0,
    prox_l1,
    quadratic_objective,
    read_libsvm,
    read_trace,
    run,
    run_experiment,
    stationarity_residual,
    synth_kl_run,
    write_libsvm,
    write_trace,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
