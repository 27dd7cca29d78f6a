r"""Separability tests and Renyi-2 entanglement of pure three-mode Gaussian states.

Entropies are in nats.  Modes (parties) are labelled 1, 2, 3; a reduced pair
is a tuple such as ``(1, 3)`` and a focus is a single label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import precision
from .arthurs_kelly import FOCUS_ORDER, bipartition_cm
from .errors import InvalidArgument, InvalidInvariants, NumericFailure
from .gaussian_states import SystemParams
from .phase_space import (
    SymplecticSpectrum,
    is_physical,
    n_modes_of,
    partial_transpose,
    symplectic_eigenvalues,
)

# Slack for the triangle inequality and for radicands that vanish analytically
# (the invariants sit exactly on the boundary for minimum-uncertainty states).
TRIANGLE_TOL = 1e-9
RADICAND_TOL = 1e-10
MONOGAMY_TOL = 1e-10

BRANCH_UNIT = "unit"
BRANCH_BETA = "beta"
BRANCH_RATIO = "ratio"

LABELS = {0: "C1", 1: "C2", 2: "C3", 3: "C4/C5"}


class LocalInvariants(NamedTuple):
    """Local symplectic invariants ``a_i = sqrt(det sigma_i)`` (inverse purities)."""

    a1: float
    a2: float
    a3: float

    def get(self, label: int) -> float:
        return self[label - 1]

    def triangle_defect(self) -> float:
        """Largest violation of ``|a_j - a_k| + 1 <= a_i <= a_j + a_k - 1``; <= 0 if valid."""
        worst = -math.inf
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            ai, aj, ak = self[i], self[j], self[k]
            worst = max(worst, abs(aj - ak) + 1 - ai, ai - (aj + ak - 1))
        return worst


def _check_triangle(inv: LocalInvariants) -> None:
    if min(inv) < 1 - TRIANGLE_TOL or inv.triangle_defect() > TRIANGLE_TOL:
        raise InvalidInvariants(f"{tuple(inv)} violates the triangle inequality")


def _other(i: int, j: int) -> int:
    (k,) = {1, 2, 3} - {i, j}
    return k


def local_invariants(cm) -> LocalInvariants:
    """Local invariants from the diagonal 2x2 blocks of a three-mode CM."""
    cm = np.asarray(cm)
    if n_modes_of(cm) != 3:
        raise InvalidArgument("local invariants need a three-mode covariance matrix")
    return LocalInvariants(*(
        precision.sqrt(precision.det(cm[2 * i:2 * i + 2, 2 * i:2 * i + 2])) for i in range(3)
    ))


def closed_form_invariants(system: SystemParams) -> LocalInvariants:
    """Analytic invariants ``a1 = a2 = sqrt(2 + 2X)``, ``a3 = sqrt(5 + 4X)``.

    ``X = sqrt(cosh^2 2r - cos^2 2theta sinh^2 2r)`` is evaluated as
    ``sqrt(1 + (sin 2theta sinh 2r)^2)``, which avoids cancellation at large |r|.
    """
    x = math.hypot(1.0, math.sin(2 * system.theta) * math.sinh(2 * system.r))
    a = math.sqrt(2 + 2 * x)
    return LocalInvariants(a, a, math.sqrt(5 + 4 * x))


def ppt_spectrum(cm, focus: int) -> SymplecticSpectrum:
    """Symplectic spectrum of the CM partially transposed on mode ``focus``.

    The spectrum keeps the ascending order of :class:`SymplecticSpectrum`; use
    ``.descending`` for the labelling ``nu~1 >= nu~2 >= nu~3``.
    """
    return symplectic_eigenvalues(partial_transpose(bipartition_cm(cm, focus), [0]))


@dataclass(frozen=True)
class GiedkeClass:
    label: str
    separable_bipartitions: frozenset = field(default_factory=frozenset)


def class_from_spectra(spectra: dict, tol: float = 1e-9) -> GiedkeClass:
    """Class from PPT spectra keyed by focus; a cut is separable iff min nu~ >= 1 - tol."""
    separable = frozenset(f for f, spec in spectra.items() if spec.min >= 1 - tol)
    return GiedkeClass(LABELS[len(separable)], separable)


def classify(cm, tol: float = 1e-9) -> GiedkeClass:
    """Separability class from the PPT test of the three one-versus-two cuts.

    C4 and C5 are not told apart; both are reported as ``"C4/C5"``.
    """
    if not is_physical(cm, tol):
        raise InvalidArgument("classify needs a physical covariance matrix")
    return class_from_spectra({f: ppt_spectrum(cm, f) for f in FOCUS_ORDER}, tol)


def _clamped(x: float, what: str) -> float:
    if x < 0:
        if x < -RADICAND_TOL:
            raise InvalidInvariants(f"{what} is negative ({x!r})")
        return 0.0
    return x


def alpha_threshold(a_i: float, a_j: float) -> float:
    """Boundary ``alpha_k`` between the ``beta`` and ``ratio`` branches of :func:`g_factor`."""
    si, sj = a_i * a_i, a_j * a_j
    diff, total = si - sj, si + sj
    return math.sqrt(
        (2 * total + diff * diff + abs(diff) * math.sqrt(diff * diff + 8 * total)) / (2 * total)
    )


def g_factor(a_i: float, a_j: float, a_k: float) -> tuple[float, str]:
    """Renyi-2 factor ``g_k`` for the reduced pair ``(i, j)`` with third mode ``k``.

    Returns:
        tuple: ``(g, branch)`` where branch is ``"unit"``, ``"beta"`` or ``"ratio"``
    """
    _check_triangle(LocalInvariants(a_i, a_j, a_k))
    si, sj, sk = a_i * a_i, a_j * a_j, a_k * a_k
    if a_k >= math.sqrt(si + sj - 1):
        return 1.0, BRANCH_UNIT
    diff = si - sj
    if alpha_threshold(a_i, a_j) < a_k:
        delta = _clamped(
            ((a_i + a_j + a_k) ** 2 - 1)
            * ((a_i - a_j + a_k) ** 2 - 1)
            * ((a_i + a_j - a_k) ** 2 - 1)
            * ((a_i - a_j - a_k) ** 2 - 1),
            "delta",
        )
        beta = (
            2 * (si + sj + sk) + 2 * (si * sj + si * sk + sj * sk)
            - si * si - sj * sj - sk * sk - math.sqrt(delta) - 1
        )
        return beta / (8 * sk), BRANCH_BETA
    if sk - 1 <= RADICAND_TOL:
        if abs(a_i - a_j) <= TRIANGLE_TOL:
            # mode k decoupled: (i, j) is a pure two-mode state
            return a_i * a_j, BRANCH_RATIO
        raise NumericFailure("g factor is singular at a_k = 1 with a_i != a_j")
    return (diff / (sk - 1)) ** 2, BRANCH_RATIO


def _pair(pair) -> tuple[int, int]:
    i, j = (int(x) for x in pair)
    if {i, j} - {1, 2, 3} or i == j:
        raise InvalidArgument(f"pair must name two distinct modes of 1, 2, 3, got {pair!r}")
    return i, j


def _focus(focus) -> int:
    if focus not in (1, 2, 3):
        raise InvalidArgument(f"focus must be 1, 2 or 3, got {focus!r}")
    return int(focus)


def renyi2_reduced(inv: LocalInvariants, pair) -> float:
    """Renyi-2 entanglement ``(1/2) ln g_k`` of the two-mode reduced state ``pair``."""
    i, j = _pair(pair)
    k = _other(i, j)
    g, _ = g_factor(inv.get(i), inv.get(j), inv.get(k))
    return 0.5 * math.log(g)


def renyi2_global(inv: LocalInvariants, focus: int) -> float:
    """Renyi-2 entanglement across ``focus | rest``: ``ln a_focus``."""
    return math.log(inv.get(_focus(focus)))


def residual_tripartite(inv: LocalInvariants, focus: int) -> float:
    """Global entanglement of ``focus`` minus its two reduced pair entanglements."""
    focus = _focus(focus)
    others = [m for m in (1, 2, 3) if m != focus]
    return renyi2_global(inv, focus) - sum(renyi2_reduced(inv, (focus, m)) for m in others)


def monogamy_residual(inv: LocalInvariants, focus: int) -> float:
    """Same value as :func:`residual_tripartite`; raises if monogamy fails."""
    value = residual_tripartite(inv, focus)
    if value < -MONOGAMY_TOL:
        raise NumericFailure(f"monogamy violated for focus {focus}: residual {value!r}")
    return value


def standard_form(inv: LocalInvariants) -> np.ndarray:
    """Pure-state standard-form covariance matrix with the given local invariants."""
    _check_triangle(inv)
    cm = np.diag(np.repeat(np.asarray(inv, dtype=float), 2))
    for i, j in ((1, 2), (1, 3), (2, 3)):
        ai, aj, ak = inv.get(i), inv.get(j), inv.get(_other(i, j))
        minus = _clamped(((ai - aj) ** 2 - (ak - 1) ** 2) * ((ai - aj) ** 2 - (ak + 1) ** 2), "radicand")
        plus = _clamped(((ai + aj) ** 2 - (ak - 1) ** 2) * ((ai + aj) ** 2 - (ak + 1) ** 2), "radicand")
        scale = 4 * math.sqrt(ai * aj)
        b_plus = (math.sqrt(minus) + math.sqrt(plus)) / scale
        b_minus = (math.sqrt(minus) - math.sqrt(plus)) / scale
        x, y = 2 * (i - 1), 2 * (j - 1)
        cm[x, y] = cm[y, x] = b_plus
        cm[x + 1, y + 1] = cm[y + 1, x + 1] = b_minus
    return cm


@dataclass(frozen=True)
class Renyi2Report:
    """All Renyi-2 quantities of one state.

    ``reduced`` is keyed by pair, ``global_`` and ``residual`` by focus,
    ``g_values`` and ``branch`` by the excluded mode ``k``.
    """

    reduced: dict
    global_: dict
    residual: dict
    g_values: dict
    branch: dict


def renyi2_report(inv: LocalInvariants) -> Renyi2Report:
    g_values, branch, reduced = {}, {}, {}
    for i, j in ((1, 2), (1, 3), (2, 3)):
        k = _other(i, j)
        g_values[k], branch[k] = g_factor(inv.get(i), inv.get(j), inv.get(k))
        reduced[(i, j)] = 0.5 * math.log(g_values[k])
    global_ = {f: renyi2_global(inv, f) for f in (1, 2, 3)}
    residual = {}
    for f in (1, 2, 3):
        others = [m for m in (1, 2, 3) if m != f]
        residual[f] = global_[f] - sum(reduced[tuple(sorted((f, m)))] for m in others)
    return Renyi2Report(reduced, global_, residual, g_values, branch)
