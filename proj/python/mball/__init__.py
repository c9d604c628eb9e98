"""Markov inequalities, Christoffel functions and kernels on the unit ball."""

from ._mball import (
    AverageCaseResult,
    ConfigError,
    ExperimentConfig,
    ExperimentRecord,
    LiftedResult,
    Ln_kernel,
    OrthoBasis,
    TraceResult,
    Weight,
    WorstCaseResult,
    average_monte_carlo,
    christoffel_l2,
    christoffel_lp,
    config_hash,
    cutoff_eta,
    dim_pi,
    dist,
    dist_tilde,
    gegenbauer,
    lifted_lower_bound,
    orthonormal_basis,
    parse_config,
    reproducing_kernel,
    run,
    serialize_config,
    trace_formula,
    worst_1d,
    worst_l2,
    worst_lp,
)

__all__ = [name for name in dir() if not name.startswith("_")]
