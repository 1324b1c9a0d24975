"""Temporal connectedness of overloaded NOMA networks.

Sampling of allocation sequences, the queue/projection matrix engine, exact
probability calculators and a seeded Monte Carlo harness.
"""
from noma_temporal.core import (
    AllocationVector,
    Frame,
    NetworkParams,
    NetworkSequence,
    NonIntegerLoad,
    Overconstrained,
    ParameterError,
    enumerate_ensemble,
    ensemble_size,
    make_params,
    sample_allocation,
    sample_sequence,
)

__all__ = [
    "AllocationVector",
    "Frame",
    "NetworkParams",
    "NetworkSequence",
    "NonIntegerLoad",
    "Overconstrained",
    "ParameterError",
    "enumerate_ensemble",
    "ensemble_size",
    "make_params",
    "sample_allocation",
    "sample_sequence",
]

__version__ = "0.1.0"
