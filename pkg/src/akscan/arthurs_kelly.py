r"""Three-mode Arthurs-Kelly measurement configuration.

Mode 1 and mode 2 are the position and momentum pointers, mode 3 is the system
under measurement.  Two independent routes build the post-interaction
covariance matrix:

* :func:`evolve` applies the Heisenberg-picture symplectic map to the product
  of the detector and system states;
* :func:`closed_form_cm` assembles the same matrix from closed-form 2x2 blocks.

Their agreement is the central consistency check of the package.

Functions that take a ``focus`` use the physical mode labels 1, 2, 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import precision
from .errors import InvalidArgument, NumericFailure
from .gaussian_states import (
    GaussianState,
    SystemParams,
    pure_single_mode,
    squeezed_detector,
    system_moments,
    tensor,
)
from .phase_space import n_modes_of, permute_modes, reduce_modes

#: Mode order, zero-based, that puts each focus first.
FOCUS_ORDER = {1: (0, 1, 2), 2: (1, 2, 0), 3: (2, 0, 1)}


@dataclass(frozen=True)
class MeasurementConfig:
    """System state, coupling strengths and detector balance.

    ``balance=None`` selects the noise-optimal value from :func:`optimal_balance`.
    """

    system: SystemParams
    alpha1: float = 1.0
    alpha2: float = 1.0
    balance: Optional[float] = None

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"{name} must be finite")
        if self.balance is not None and not (self.balance > 0 and math.isfinite(self.balance)):
            raise InvalidArgument(f"balance must be positive, got {self.balance!r}")

    def resolved_balance(self, lib=math):
        if self.balance is None:
            return optimal_balance(self.system, lib)
        return precision.scalar(self.balance, lib)


def optimal_balance(system: SystemParams, lib=math):
    """Balance ``b = dx3/dp3`` that minimises the product of the pointer variances."""
    _, _, var_q, var_p, _ = system_moments(system, lib)
    return lib.sqrt(var_q / var_p)


def ak_symplectic(alpha1: float = 1.0, alpha2: float = 1.0) -> np.ndarray:
    """Symplectic matrix of the interaction, acting on ``(x1, p1, x2, p2, x3, p3)``.

    Args:
        alpha1 (float): position-pointer displacement strength
        alpha2 (float): momentum-pointer displacement strength

    Returns:
        array: 6x6 matrix ``S`` with ``R' = S R``
    """
    if not (math.isfinite(alpha1) and math.isfinite(alpha2)):
        raise InvalidArgument("displacement strengths must be finite")
    c = alpha1 * alpha2 / 2
    S = np.eye(6)
    S[0, 3], S[0, 4] = c, alpha1  # x1' = x1 + a1 x3 + (a1 a2 / 2) p2
    S[2, 1], S[2, 5] = -c, alpha2  # x2' = x2 + a2 p3 - (a1 a2 / 2) p1
    S[4, 3] = alpha2  # x3' = x3 + a2 p2
    S[5, 1] = -alpha1  # p3' = p3 - a1 p1
    return S


def initial_state(config: MeasurementConfig, lib=math) -> GaussianState:
    """Product of the two pointers (``V1 = b``, ``V2 = 1/b``) and the system."""
    b = config.resolved_balance(lib)
    return tensor([
        squeezed_detector(b, lib),
        squeezed_detector(1 / b, lib),
        pure_single_mode(config.system, lib),
    ])


def evolve(config: MeasurementConfig, lib=math) -> GaussianState:
    """State after the interaction: ``mean' = S mean``, ``cov' = S cov S^T``."""
    state = initial_state(config, lib)
    S = ak_symplectic(config.alpha1, config.alpha2)
    mean = (S.astype(object) if state.mean.dtype == object else S) @ state.mean
    return GaussianState(mean, precision.congruence(S, state.cov))


def bipartition_cm(state, focus: int) -> np.ndarray:
    """Covariance matrix reordered so that mode ``focus`` (1, 2 or 3) comes first.

    ``state`` may be a :class:`GaussianState` or a bare 6x6 covariance matrix.
    """
    cm = state.cov if isinstance(state, GaussianState) else np.asarray(state)
    if n_modes_of(cm) != 3:
        raise InvalidArgument("bipartitions are defined for three-mode states")
    if focus not in FOCUS_ORDER:
        raise InvalidArgument(f"focus must be 1, 2 or 3, got {focus!r}")
    return permute_modes(cm, FOCUS_ORDER[focus])


def closed_form_blocks(system: SystemParams, lib=math) -> dict:
    """Closed-form 2x2 blocks of the focus-1 covariance matrix.

    Coupling strengths are fixed at one and the balance at its optimum.  The
    keys are ``sigma1``, ``sigma2``, ``sigma3``, ``eps12``, ``eps13``, ``eps23``.
    """
    _, _, var_q3, var_p3, cov = system_moments(system, lib)
    b = lib.sqrt(var_q3 / var_p3)
    var_x1, var_p1 = b / 2, 2 / b
    var_x2, var_p2 = 1 / (2 * b), 2 * b
    blocks = {
        "sigma1": [[var_x1 + var_p2 / 4 + var_q3, 0], [0, var_p1]],
        "sigma2": [[var_p1 / 4 + var_x2 + var_p3, 0], [0, var_p2]],
        "sigma3": [[var_p2 + var_q3, cov], [cov, var_p1 + var_p3]],
        "eps12": [[cov, var_p2 / 2], [-var_p1 / 2, 0]],
        "eps13": [[var_p2 / 2 + var_q3, cov], [0, -var_p1]],
        "eps23": [[cov, var_p1 / 2 + var_p3], [var_p2, 0]],
    }
    return {k: precision.array(v, lib) for k, v in blocks.items()}


def assemble_blocks(blocks: dict) -> np.ndarray:
    """Builds the 6x6 matrix ``[[s1, e12, e13], [e12^T, s2, e23], [e13^T, e23^T, s3]]``."""
    s1, s2, s3 = blocks["sigma1"], blocks["sigma2"], blocks["sigma3"]
    e12, e13, e23 = blocks["eps12"], blocks["eps13"], blocks["eps23"]
    return np.block([[s1, e12, e13], [e12.T, s2, e23], [e13.T, e23.T, s3]])


def closed_form_cm(system: SystemParams, lib=math) -> np.ndarray:
    """Focus-1 covariance matrix from the closed-form blocks, independent of :func:`evolve`."""
    return assemble_blocks(closed_form_blocks(system, lib))


class NoiseDecomposition(NamedTuple):
    dx1p_sq: float
    dx2p_sq: float
    eta1: float
    eta2: float


def noise_decomposition(system: SystemParams, balance: Optional[float] = None) -> NoiseDecomposition:
    """Pointer variances split into system variance plus detector noise.

    ``dx1p_sq = var(x3) + b`` and ``dx2p_sq = var(p3) + 1/b``; both are checked
    against the diagonal of the evolved covariance matrix.
    """
    config = MeasurementConfig(system, balance=balance)
    b = config.resolved_balance()
    _, _, var_q, var_p, _ = system_moments(system)
    out = NoiseDecomposition(var_q + b, var_p + 1 / b, b, 1 / b)
    cov = evolve(config).cov
    for got, want in ((cov[0, 0], out.dx1p_sq), (cov[2, 2], out.dx2p_sq)):
        if abs(got - want) > 1e-9 * max(1.0, abs(want)):
            raise NumericFailure(f"noise decomposition {want!r} disagrees with evolved variance {got!r}")
    return out


class PureStateConditions(NamedTuple):
    """Residuals of the pure three-mode conditions."""

    det: float  # Det sigma, equal to 1
    delta: float  # Delta_123, equal to 3
    pair_defect: float  # max_k |Det sigma_ij - Det sigma_k|


def pure_state_conditions(cm) -> PureStateConditions:
    """Evaluates Det sigma, Delta_123 and the reduced-determinant identities.

    Delta is built from the 2x2 blocks of the given (focus-1) ordering.  Works
    on float arrays and on extended-precision ``object`` arrays.
    """
    cm = np.asarray(cm)
    if n_modes_of(cm) != 3:
        raise InvalidArgument("pure-state conditions are defined for three modes")

    def block(i, j):
        return cm[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    local = [precision.det(block(i, i)) for i in range(3)]
    cross = [precision.det(block(i, j)) for i, j in ((0, 1), (0, 2), (1, 2))]
    delta = sum(local) + 2 * sum(cross)
    pair_defect = 0
    for k, (i, j) in enumerate(((1, 2), (0, 2), (0, 1))):
        pair_defect = max(pair_defect, abs(precision.det(reduce_modes(cm, (i, j))) - local[k]))
    return PureStateConditions(precision.det(cm), delta, pair_defect)
