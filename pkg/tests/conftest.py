import math

import numpy as np
import pytest
import scipy.linalg

from akscan.phase_space import symplectic_form

_ACCEPTANCE = []


def record(criterion, passed, detail):
    """Prints one acceptance line and keeps it for the end-of-run summary."""
    _ACCEPTANCE.append((criterion, bool(passed), detail))
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    def order(item):
        label = item[0]
        digits = "".join(ch for ch in label if ch.isdigit())
        return int(digits), label

    for criterion, passed, detail in sorted(_ACCEPTANCE, key=order):
        terminalreporter.write_line(f"criterion {criterion:>4}: {'PASS' if passed else 'FAIL'}  {detail}")


def random_symplectic(rng, n_modes, scale=0.5):
    """exp(Omega H) for a random symmetric H; always symplectic."""
    h = rng.normal(scale=scale, size=(2 * n_modes, 2 * n_modes))
    return scipy.linalg.expm(symplectic_form(n_modes) @ (h + h.T) / 2)


def williamson_cm(rng, nus, scale=0.5):
    """Covariance matrix S diag(nu) S^T with known symplectic spectrum nus."""
    S = random_symplectic(rng, len(nus), scale)
    return S @ np.diag(np.repeat(nus, 2)) @ S.T


def two_mode_squeezed(r):
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    return np.array([
        [c, 0, s, 0],
        [0, c, 0, -s],
        [s, 0, c, 0],
        [0, -s, 0, c],
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
