"""Entanglement of the three-mode Arthurs-Kelly Gaussian measurement state."""

from .arthurs_kelly import (
    MeasurementConfig,
    closed_form_cm,
    evolve,
    noise_decomposition,
    optimal_balance,
    pure_state_conditions,
)
from .entanglement import (
    LocalInvariants,
    classify,
    closed_form_invariants,
    g_factor,
    local_invariants,
    ppt_spectrum,
    renyi2_report,
    residual_tripartite,
    standard_form,
)
from .errors import InvalidArgument, InvalidInvariants, NumericFailure
from .gaussian_states import GaussianState, SystemParams
from .phase_space import symplectic_eigenvalues

__all__ = [
    "GaussianState",
    "InvalidArgument",
    "InvalidInvariants",
    "LocalInvariants",
    "MeasurementConfig",
    "NumericFailure",
    "SystemParams",
    "classify",
    "closed_form_cm",
    "closed_form_invariants",
    "evolve",
    "g_factor",
    "local_invariants",
    "noise_decomposition",
    "optimal_balance",
    "ppt_spectrum",
    "pure_state_conditions",
    "renyi2_report",
    "residual_tripartite",
    "standard_form",
    "symplectic_eigenvalues",
]
