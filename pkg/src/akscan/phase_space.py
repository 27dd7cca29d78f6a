r"""Symplectic linear algebra over covariance matrices.

Quadratures are ordered mode by mode, :math:`(x_1, p_1, \dots, x_N, p_N)`, and
the convention :math:`\hbar = 2` is used throughout, so the vacuum covariance
matrix is the identity and a state is physical iff all of its symplectic
eigenvalues are at least one.

Mode indices in this module are zero-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, NumericFailure
from .precision import sqrt

#: Default tolerance for :func:`is_physical`.
PHYSICAL_TOL = 1e-9

_W = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic eigenvalues of a covariance matrix.

    Attributes:
        values: the N symplectic eigenvalues, sorted ascending
        pairing_defect: largest mismatch :math:`|\\lambda_+ + \\lambda_-|` between
            paired eigenvalues of :math:`i\\Omega\\sigma`
    """

    values: np.ndarray
    pairing_defect: float = 0.0

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def descending(self) -> np.ndarray:
        """Values sorted descending, the labelling used for partial transposes."""
        return self.values[::-1].copy()

    @property
    def min(self) -> float:
        return float(self.values[0])


def symplectic_form(n_modes: int) -> np.ndarray:
    r"""Returns the symplectic form :math:`\Omega = \bigoplus_{k=1}^N w`.

    Args:
        n_modes (int): number of modes

    Returns:
        array: :math:`2N\times 2N` antisymmetric matrix with ``[[0, 1], [-1, 0]]`` blocks
    """
    if isinstance(n_modes, bool) or int(n_modes) != n_modes or n_modes < 1:
        raise InvalidArgument(f"n_modes must be a positive integer, got {n_modes!r}")
    return _omega(int(n_modes))


@lru_cache(maxsize=None)
def _omega(n: int) -> np.ndarray:
    omega = np.kron(np.eye(n), _W)
    omega.flags.writeable = False
    return omega


def n_modes_of(cm: np.ndarray) -> int:
    """Number of modes of a covariance matrix, validating its shape."""
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] % 2 or cm.shape[0] == 0:
        raise InvalidArgument(f"covariance matrix must be square of even size, got shape {cm.shape}")
    return cm.shape[0] // 2


def symmetry_defect(cm: np.ndarray) -> float:
    """Relative Frobenius-norm asymmetry ``|cm - cm.T| / |cm|``."""
    cm = np.asarray(cm, dtype=float)
    scale = np.linalg.norm(cm)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(cm - cm.T) / scale)


def _check_cm(cm) -> np.ndarray:
    cm = np.asarray(cm, dtype=float)
    n_modes_of(cm)
    if not np.all(np.isfinite(cm)):
        raise InvalidArgument("covariance matrix has non-finite entries")
    if symmetry_defect(cm) > 1e-12:
        raise InvalidArgument("covariance matrix is not symmetric")
    try:
        np.linalg.cholesky(cm)
    except np.linalg.LinAlgError as exc:
        raise InvalidArgument("covariance matrix is not positive definite") from exc
    return cm


def _pair_eigenvalues(lam: np.ndarray) -> tuple[np.ndarray, float]:
    # Greedy nearest-modulus matching of +nu with -nu.
    pos = sorted((x for x in lam if x.real >= 0), key=abs)
    neg = [x for x in lam if x.real < 0]
    if len(pos) != len(neg):
        # Sign split is ambiguous only for (near-)zero eigenvalues; fall back to
        # pairing neighbours in modulus.
        ordered = sorted(lam, key=abs)
        pairs = list(zip(ordered[0::2], ordered[1::2]))
    else:
        pairs = []
        for x in pos:
            j = min(range(len(neg)), key=lambda k: abs(abs(neg[k]) - abs(x)))
            pairs.append((x, neg.pop(j)))
    values = np.sort([0.5 * (abs(a) + abs(b)) for a, b in pairs])
    defect = max(abs(a + b) for a, b in pairs)
    return values, float(defect)


def symplectic_eigenvalues(cm) -> SymplecticSpectrum:
    r"""Symplectic eigenvalues as the moduli of the eigenvalues of :math:`i\Omega\sigma`.

    A general complex eigensolver is used so that partially transposed
    (possibly unphysical) matrices are handled the same way as physical ones.

    Args:
        cm (array): symmetric positive-definite covariance matrix

    Returns:
        SymplecticSpectrum: N eigenvalues sorted ascending
    """
    cm = _check_cm(cm)
    omega = symplectic_form(cm.shape[0] // 2)
    try:
        lam = np.linalg.eigvals(1j * omega @ cm)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure("eigensolver did not converge") from exc
    if not np.all(np.isfinite(lam)):
        raise NumericFailure("eigensolver returned non-finite values")
    values, defect = _pair_eigenvalues(lam)
    return SymplecticSpectrum(values, defect)


def is_physical(cm, tol: float = PHYSICAL_TOL) -> bool:
    """True iff the smallest symplectic eigenvalue is at least ``1 - tol``."""
    if tol < 0:
        raise InvalidArgument("tol must be non-negative")
    return symplectic_eigenvalues(cm).min >= 1.0 - tol


def _check_modes(modes: Sequence[int], n: int) -> list[int]:
    modes = [int(m) for m in modes]
    for m in modes:
        if not 0 <= m < n:
            raise InvalidArgument(f"mode index {m} out of range for {n} modes")
    return modes


def partial_transpose(cm, transposed_modes: Sequence[int]) -> np.ndarray:
    """Partial transposition: flips the sign of every momentum on the listed modes.

    Args:
        cm (array): covariance matrix
        transposed_modes (Sequence[int]): modes to transpose

    Returns:
        array: ``T @ cm @ T`` with ``T`` diagonal, ``-1`` on the listed momenta
    """
    cm = np.array(cm)
    n = n_modes_of(cm)
    sign = np.ones(2 * n)
    for m in set(_check_modes(transposed_modes, n)):
        sign[2 * m + 1] = -1.0
    return cm * np.outer(sign, sign)


def _quadrature_index(modes: Sequence[int]) -> np.ndarray:
    return np.array([[2 * m, 2 * m + 1] for m in modes], dtype=int).reshape(-1)


def permute_modes(cm, order: Sequence[int]) -> np.ndarray:
    """Reorders modes so that new mode ``k`` is old mode ``order[k]``."""
    cm = np.asarray(cm)
    n = n_modes_of(cm)
    order = _check_modes(order, n)
    if sorted(order) != list(range(n)):
        raise InvalidArgument(f"{order!r} is not a permutation of {n} modes")
    idx = _quadrature_index(order)
    return cm[np.ix_(idx, idx)]


def reduce_modes(cm, keep: Sequence[int]) -> np.ndarray:
    """Covariance matrix of the reduced state on ``keep`` (principal submatrix)."""
    cm = np.asarray(cm)
    n = n_modes_of(cm)
    keep = _check_modes(keep, n)
    if not keep:
        raise InvalidArgument("keep must list at least one mode")
    if len(set(keep)) != len(keep):
        raise InvalidArgument("keep has repeated modes")
    idx = _quadrature_index(keep)
    return cm[np.ix_(idx, idx)]


def symplectic_condition_defect(S) -> float:
    r"""Max-abs entry of :math:`S\Omega S^T - \Omega`."""
    S = np.asarray(S, dtype=float)
    omega = symplectic_form(S.shape[0] // 2)
    return float(np.max(np.abs(S @ omega @ S.T - omega)))


def local_normal_form(cm) -> tuple[np.ndarray, list]:
    r"""Brings every diagonal 2x2 block to ``a_i * I`` with local symplectic maps.

    For each mode the map is :math:`L_i = \sqrt{a_i}\,\sigma_i^{-1/2}` with
    :math:`a_i = \sqrt{\det\sigma_i}`.  Local symplectic maps change neither the
    symplectic spectrum nor the spectrum of any partial transpose, and the
    normalised matrix has entries no larger than the ``a_i``.  Evaluating this
    step in extended precision and rounding afterwards therefore removes the
    cancellation that strongly squeezed blocks cause in double precision.

    Works on float arrays and on extended-precision ``object`` arrays.

    Args:
        cm (array): covariance matrix with positive-definite diagonal blocks

    Returns:
        tuple: ``(normalised cm, [a_1, ..., a_N])``
    """
    cm = np.asarray(cm)
    n = n_modes_of(cm)
    maps, local = [], []
    for i in range(n):
        (a, c), (_, b) = cm[2 * i:2 * i + 2, 2 * i:2 * i + 2]
        s = sqrt(a * b - c * c)
        # sqrt(block) = (block + s I) / t, whose inverse is adj(block + s I) / (s t)
        t = sqrt(a + b + 2 * s)
        k = sqrt(s) / (s * t)
        maps.append(np.array([[k * (b + s), -k * c], [-k * c, k * (a + s)]]))
        local.append(s)
    out = np.empty_like(cm)
    for i in range(n):
        for j in range(n):
            block = cm[2 * i:2 * i + 2, 2 * j:2 * j + 2]
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = maps[i] @ block @ maps[j].T
    return out, local
