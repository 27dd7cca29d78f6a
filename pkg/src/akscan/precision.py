"""Extended-precision support.

Covariance matrices of strongly squeezed states (|r| ~ 5) carry entries of
order ``cosh 10 ~ 1e4``; determinant identities that should hold to 1e-9 then
lose about eight digits to cancellation in float64.  The constructors in this
package accept a scalar math library (``math`` by default, or ``gmpy2``) so
the same formulas can be evaluated with ``mpfr`` scalars held in numpy
``object`` arrays.
"""

from __future__ import annotations

import contextlib
import math

import gmpy2
import numpy as np

#: Working precision, in bits, used by :func:`extended`.
DEFAULT_BITS = 160


@contextlib.contextmanager
def extended(bits: int = DEFAULT_BITS):
    """Context in which ``gmpy2`` arithmetic runs at ``bits`` of precision."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        yield gmpy2


def is_extended(lib) -> bool:
    return lib is gmpy2


def scalar(x, lib=math):
    """Converts a Python number to the scalar type of ``lib`` (exactly for floats)."""
    return gmpy2.mpfr(x) if lib is gmpy2 else float(x)


def sqrt(x):
    return gmpy2.sqrt(x) if isinstance(x, type(gmpy2.mpfr(0))) else math.sqrt(x)


def array(rows, lib=math) -> np.ndarray:
    return np.array(rows, dtype=object if lib is gmpy2 else float)


def zeros(shape, lib=math) -> np.ndarray:
    if lib is gmpy2:
        out = np.empty(shape, dtype=object)
        out.fill(gmpy2.mpfr(0))
        return out
    return np.zeros(shape)


def congruence(S, m) -> np.ndarray:
    """``S @ m @ S.T`` for a float ``S`` and a float or ``object`` (``mpfr``) ``m``.

    Python floats combine exactly with ``mpfr`` scalars, so ``S`` is not
    converted to ``mpfr`` first.
    """
    if m.dtype == object:
        S = S.astype(object)
    return S @ m @ S.T


def det(m) -> float:
    """Determinant of a float or ``object`` (``mpfr``) square matrix.

    Object arrays are reduced by Gaussian elimination with partial pivoting in
    the scalars' own arithmetic, so the result keeps their precision.
    """
    m = np.asarray(m)
    if m.dtype != object:
        return float(np.linalg.det(m))
    a = [list(row) for row in m]
    n = len(a)
    result = gmpy2.mpfr(1)
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(a[i][col]))
        if a[piv][col] == 0:
            return gmpy2.mpfr(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            result = -result
        pivot = a[col][col]
        result *= pivot
        for i in range(col + 1, n):
            f = a[i][col] / pivot
            if f:
                row_i, row_c = a[i], a[col]
                for j in range(col + 1, n):
                    row_i[j] -= f * row_c[j]
    return result
