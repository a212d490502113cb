"""Explicit geometric-ergodicity certificates for Markov chains and 1-d diffusions."""

from ._ergocert import (
    ConditionFailure,
    InvalidInput,
    NumericOverflow,
    TruncationError,
    certify_chain,
    certify_diffusion,
    certify_drift_minorization,
    deviation_curve,
    euler_ensemble,
    invariant_density,
    renewal_bound,
    renewal_sequence,
    simulate_chain,
    simulate_coupling,
)

__all__ = [
    "ConditionFailure",
    "InvalidInput",
    "NumericOverflow",
    "TruncationError",
    "certify_chain",
    "certify_diffusion",
    "certify_drift_minorization",
    "deviation_curve",
    "euler_ensemble",
    "invariant_density",
    "renewal_bound",
    "renewal_sequence",
    "simulate_chain",
    "simulate_coupling",
]

__version__ = "0.1.0"
