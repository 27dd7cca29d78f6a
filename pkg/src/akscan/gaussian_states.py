r"""Gaussian state constructors and phase-space functions.

All covariance matrices use :math:`\hbar = 2`: the vacuum has unit variance in
both quadratures.  Constructors accept ``lib`` (``math`` or ``gmpy2``) to pick
the scalar arithmetic; see :mod:`akscan.precision`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from . import precision
from .errors import InvalidArgument, NumericFailure
from .phase_space import n_modes_of, symplectic_form

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GaussianState:
    """First moments ``mean`` and covariance matrix ``cov`` of an N-mode state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        n = n_modes_of(self.cov)
        if np.shape(self.mean) != (2 * n,):
            raise InvalidArgument(
                f"mean has shape {np.shape(self.mean)}, expected ({2 * n},)"
            )

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2


@dataclass(frozen=True)
class SystemParams:
    """Rotated, displaced, squeezed vacuum :math:`D(\\alpha)R(\\theta)S(r)|0\\rangle`.

    ``q`` and ``p`` are the displacement components of ``alpha = q + i p / 2``;
    ``theta`` is wrapped into ``[0, 2*pi)`` on construction.
    """

    q: float = 0.0
    p: float = 0.0
    theta: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        for name in ("q", "p", "theta", "r"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidArgument(f"{name} must be finite, got {value!r}")
        object.__setattr__(self, "theta", math.fmod(self.theta, TWO_PI) % TWO_PI)


def system_moments(params: SystemParams, lib=math):
    """Means, variances and covariance of the system quadratures.

    Returns:
        tuple: ``(mean_q, mean_p, var_q, var_p, cov)``
    """
    r = precision.scalar(params.r, lib)
    th = precision.scalar(params.theta, lib)
    q = precision.scalar(params.q, lib)
    p = precision.scalar(params.p, lib)
    c, s = lib.cos(th), lib.sin(th)
    em, ep = lib.exp(-r), lib.exp(r)
    mean_q = q * em * c + p * ep * s
    mean_p = -q * em * s + p * ep * c
    var_q = (c * em) ** 2 + (s * ep) ** 2
    var_p = (s * em) ** 2 + (c * ep) ** 2
    # sin(theta)cos(theta)(e^{2r} - e^{-2r}), the symmetrised x-p covariance
    cov = lib.sin(2 * th) * lib.sinh(2 * r)
    return mean_q, mean_p, var_q, var_p, cov


def pure_single_mode(params: SystemParams, lib=math) -> GaussianState:
    """Gaussian state of the system under measurement.

    Args:
        params (SystemParams): displacement, rotation angle and squeezing
        lib: scalar math library, ``math`` or ``gmpy2``

    Returns:
        GaussianState: single-mode pure state
    """
    mean_q, mean_p, var_q, var_p, cov = system_moments(params, lib)
    return GaussianState(
        precision.array([mean_q, mean_p], lib),
        precision.array([[var_q, cov], [cov, var_p]], lib),
    )


def squeezed_detector(V: float, lib=math) -> GaussianState:
    """Centred pointer state with position variance ``V/2`` and momentum variance ``2/V``."""
    if not (V > 0 and math.isfinite(V)):
        raise InvalidArgument(f"V must be positive and finite, got {V!r}")
    V = precision.scalar(V, lib)
    return GaussianState(
        precision.zeros(2, lib),
        precision.array([[V / 2, 0], [0, 2 / V]], lib),
    )


def tensor(states: Sequence[GaussianState]) -> GaussianState:
    """Product state; modes are ordered as in ``states``."""
    states = list(states)
    if not states:
        raise InvalidArgument("tensor needs at least one state")
    extended = any(s.cov.dtype == object for s in states)
    lib = precision.gmpy2 if extended else math
    n = sum(s.n_modes for s in states)
    cov = precision.zeros((2 * n, 2 * n), lib)
    mean = precision.zeros(2 * n, lib)
    k = 0
    for s in states:
        d = 2 * s.n_modes
        cov[k:k + d, k:k + d] = s.cov
        mean[k:k + d] = s.mean
        k += d
    return GaussianState(mean, cov)


def _check_point(state: GaussianState, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (2 * state.n_modes,):
        raise InvalidArgument(f"expected a vector of length {2 * state.n_modes}, got shape {v.shape}")
    return v


def characteristic(state: GaussianState, xi) -> complex:
    r"""Characteristic function :math:`\chi(\xi)=\exp[-\frac12\xi^T\Omega\sigma\Omega^T\xi - i(\Omega\bar R)^T\xi]`."""
    xi = _check_point(state, xi)
    omega = symplectic_form(state.n_modes)
    cov = np.asarray(state.cov, dtype=float)
    mean = np.asarray(state.mean, dtype=float)
    quad = xi @ (omega @ cov @ omega.T) @ xi
    return complex(np.exp(-0.5 * quad - 1j * (omega @ mean) @ xi))


def wigner(state: GaussianState, point) -> float:
    """Gaussian Wigner function evaluated at a phase-space point."""
    point = _check_point(state, point)
    cov = np.asarray(state.cov, dtype=float)
    try:
        factor = scipy.linalg.cho_factor(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure("covariance matrix is singular or indefinite") from exc
    d = point - np.asarray(state.mean, dtype=float)
    quad = d @ scipy.linalg.cho_solve(factor, d)
    # det from the Cholesky diagonal: sqrt(det cov) = prod(diag L)
    sqrt_det = np.prod(np.diag(factor[0]))
    return float(np.exp(-0.5 * quad) / ((2 * np.pi) ** state.n_modes * sqrt_det))


def purity(state) -> float:
    """Purity ``1/sqrt(det cov)`` of a state or of a bare covariance matrix."""
    cov = state.cov if isinstance(state, GaussianState) else np.asarray(state)
    n_modes_of(cov)
    d = precision.det(cov)
    if d <= 0:
        raise InvalidArgument("covariance matrix has non-positive determinant")
    return 1 / precision.sqrt(d)
