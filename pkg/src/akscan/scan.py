"""Grid evaluation, point reports, extremum search and the invariant battery."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from . import precision
from .arthurs_kelly import (
    MeasurementConfig,
    closed_form_blocks,
    assemble_blocks,
    evolve,
    noise_decomposition,
    pure_state_conditions,
)
from .entanglement import (
    LocalInvariants,
    class_from_spectra,
    closed_form_invariants,
    ppt_spectrum,
    renyi2_report,
)
from .gaussian_states import SystemParams
from .phase_space import local_normal_form

TWO_PI = 2 * math.pi
PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class SweepGrid:
    """Rectangular (r, theta) grid; both ends are included."""

    r_min: float = -5.0
    r_max: float = 5.0
    r_steps: int = 201
    theta_min: float = 0.0
    theta_max: float = TWO_PI
    theta_steps: int = 181

    def __post_init__(self):
        if self.r_steps < 2 or self.theta_steps < 2:
            raise ValueError("grid needs at least two steps per axis")
        if not (self.r_min < self.r_max and self.theta_min < self.theta_max):
            raise ValueError("grid bounds must be increasing")
        for v in (self.r_min, self.r_max, self.theta_min, self.theta_max):
            if not math.isfinite(v):
                raise ValueError("grid bounds must be finite")

    @property
    def r_values(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.r_steps)

    @property
    def theta_values(self) -> np.ndarray:
        return np.linspace(self.theta_min, self.theta_max, self.theta_steps)

    def points(self) -> list[tuple[float, float]]:
        return [(float(r), float(t)) for r in self.r_values for t in self.theta_values]


#: Coarse grid used by the invariant battery.
VERIFY_GRID = SweepGrid(r_steps=41, theta_steps=37)
#: Coarse grid for extremum search; contains r = 0 and every multiple of pi/2.
EXTREMIZE_GRID = SweepGrid()


@dataclass(frozen=True)
class SweepRow:
    r: float
    theta: float
    nu3_f1: float
    nu3_f2: float
    nu3_f3: float
    nu2_f1: float
    a1: float
    a2: float
    a3: float
    E_ds: float
    E_dds: float
    E_g3: float
    E_res_d: float
    E_res_s: float
    giedke_class: str
    g_branch: str


FIELDS = [f.name for f in dataclasses.fields(SweepRow)]
NUMERIC_FIELDS = [f.name for f in dataclasses.fields(SweepRow) if f.type == "float"]
#: Fields that carry entanglement content (everything except the coordinates).
ENTANGLEMENT_FIELDS = FIELDS[2:]


def _spectra(cm) -> dict:
    return {f: ppt_spectrum(cm, f) for f in (1, 2, 3)}


def prepared_state(config: MeasurementConfig):
    """Evolved state with its covariance matrix in local normal form.

    The evolution and the normalisation run in extended precision; the result
    is rounded to float only afterwards.  Entanglement quantities are invariant
    under the local maps involved, so they can be read off the normalised matrix.

    Returns:
        tuple: ``(float mean, float normalised cm, LocalInvariants)``
    """
    with precision.extended() as lib:
        state = evolve(config, lib)
        cm, local = local_normal_form(state.cov)
        return (
            np.array(state.mean, dtype=float),
            np.array(cm, dtype=float),
            LocalInvariants(*(float(a) for a in local)),
        )


def evaluate_point_full(r: float, theta: float, q: float = 0.0, p: float = 0.0):
    """Sweep row at one point together with the three PPT spectra it was read from.

    Returns:
        tuple: ``(SweepRow, {focus: SymplecticSpectrum})``
    """
    system = SystemParams(q=q, p=p, theta=theta, r=r)
    _, cm, inv = prepared_state(MeasurementConfig(system))
    spectra = _spectra(cm)
    rep = renyi2_report(inv)
    row = SweepRow(
        r=r,
        theta=theta,
        nu3_f1=spectra[1].min,
        nu3_f2=spectra[2].min,
        nu3_f3=spectra[3].min,
        nu2_f1=float(spectra[1].values[1]),
        a1=inv.a1,
        a2=inv.a2,
        a3=inv.a3,
        E_ds=rep.reduced[(1, 3)],
        E_dds=rep.global_[1],
        E_g3=rep.global_[3],
        E_res_d=rep.residual[1],
        E_res_s=rep.residual[3],
        giedke_class=class_from_spectra(spectra).label,
        g_branch=rep.branch[2],
    )
    return row, spectra


def evaluate_point(r: float, theta: float, q: float = 0.0, p: float = 0.0) -> SweepRow:
    """All sweep quantities at one (r, theta) with displacement (q, p)."""
    return evaluate_point_full(r, theta, q, p)[0]


def point_report(r: float, theta: float, q: float = 0.0, p: float = 0.0) -> dict:
    """Full entanglement report at one point, as plain JSON-serialisable data."""
    system = SystemParams(q=q, p=p, theta=theta, r=r)
    config = MeasurementConfig(system)
    mean, cm, inv = prepared_state(config)
    spectra = _spectra(cm)
    rep = renyi2_report(inv)
    giedke = class_from_spectra(spectra)
    noise = noise_decomposition(system)
    return {
        "system": dataclasses.asdict(system),
        "balance": config.resolved_balance(),
        "noise": noise._asdict(),
        "mean": mean.tolist(),
        "ppt_spectra": {
            f"{f}|{''.join(str(m) for m in (1, 2, 3) if m != f)}": {
                "nu_tilde": spec.descending.tolist(),
                "pairing_defect": spec.pairing_defect,
            }
            for f, spec in spectra.items()
        },
        "giedke_class": giedke.label,
        "separable_bipartitions": sorted(giedke.separable_bipartitions),
        "local_invariants": inv._asdict(),
        "renyi2": {
            "reduced": {f"{i}|{j}": v for (i, j), v in rep.reduced.items()},
            "global": {str(k): v for k, v in rep.global_.items()},
            "residual": {str(k): v for k, v in rep.residual.items()},
            "g": {str(k): v for k, v in rep.g_values.items()},
            "branch": {str(k): v for k, v in rep.branch.items()},
        },
    }


def _evaluate_chunk(points):
    return [evaluate_point(r, t) for r, t in points]


def worker_count() -> int:
    """Worker processes from ``AK_SCAN_THREADS`` (0 or unset: one per CPU)."""
    raw = os.environ.get("AK_SCAN_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("AK_SCAN_THREADS must be non-negative")
    return n if n > 0 else (os.cpu_count() or 1)


def sweep(grid: SweepGrid, workers: Optional[int] = None) -> list[SweepRow]:
    """Rows for every grid point, r-major then theta, independent of ``workers``."""
    points = grid.points()
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        return _evaluate_chunk(points)
    size = math.ceil(len(points) / (4 * workers))
    chunks = [points[i:i + size] for i in range(0, len(points), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [row for part in pool.map(_evaluate_chunk, chunks) for row in part]


def _format(value) -> str:
    return value if isinstance(value, str) else format(value, ".16e")


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELDS)
    for row in rows:
        writer.writerow([_format(getattr(row, f)) for f in FIELDS])
    return buf.getvalue()


def rows_to_json(rows: Iterable[SweepRow]) -> str:
    return json.dumps([dataclasses.asdict(row) for row in rows], indent=1) + "\n"


def branch_occupancy(rows: Iterable[SweepRow]) -> dict:
    counts: dict = {}
    for row in rows:
        counts[row.g_branch] = counts.get(row.g_branch, 0) + 1
    return counts


# -- extremum search --------------------------------------------------------


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10):
    """Maximiser of a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c, d = b - PHI * (b - a), a + PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + PHI * (b - a)
            fd = f(d)
    candidates = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    best_f, best_x = max(candidates)
    return best_x, best_f


@dataclass(frozen=True)
class Extremum:
    quantity: str
    mode: str
    value: float
    r: float
    theta: float


def quantity_function(quantity: str) -> Callable[[float, float], float]:
    if quantity not in NUMERIC_FIELDS or quantity in ("r", "theta"):
        raise KeyError(quantity)
    return lambda r, theta: getattr(evaluate_point(r, theta), quantity)


def extremize(
    quantity: str,
    mode: str = "max",
    grid: SweepGrid = EXTREMIZE_GRID,
    fixed_r: Optional[float] = None,
    fixed_theta: Optional[float] = None,
    rounds: int = 3,
) -> Extremum:
    """Coarse grid scan followed by golden-section refinement around the best cell.

    Args:
        quantity (str): numeric :class:`SweepRow` field
        mode (str): ``"max"`` or ``"min"``
        grid (SweepGrid): coarse grid (an axis collapses when pinned)
        fixed_r (float): pin r and search over theta only
        fixed_theta (float): pin theta and search over r only
        rounds (int): coordinate-wise refinement passes

    Returns:
        Extremum: best value and its location
    """
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    raw = quantity_function(quantity)
    sign = 1.0 if mode == "max" else -1.0

    def f(r, t):
        return sign * raw(r, t)

    r_axis = np.array([fixed_r]) if fixed_r is not None else grid.r_values
    t_axis = np.array([fixed_theta]) if fixed_theta is not None else grid.theta_values
    best = (-math.inf, 0, 0)
    for i, r in enumerate(r_axis):
        for j, t in enumerate(t_axis):
            v = f(float(r), float(t))
            if v > best[0]:
                best = (v, i, j)
    value, i, j = best
    r, t = float(r_axis[i]), float(t_axis[j])
    r_lo, r_hi = float(r_axis[max(i - 1, 0)]), float(r_axis[min(i + 1, len(r_axis) - 1)])
    t_lo, t_hi = float(t_axis[max(j - 1, 0)]), float(t_axis[min(j + 1, len(t_axis) - 1)])
    for _ in range(rounds):
        if fixed_r is None and r_hi > r_lo:
            r_new, v = golden_section_max(lambda x: f(x, t), r_lo, r_hi)
            if v > value:
                r, value = r_new, v
        if fixed_theta is None and t_hi > t_lo:
            t_new, v = golden_section_max(lambda x: f(r, x), t_lo, t_hi)
            if v > value:
                t, value = t_new, v
    return Extremum(quantity, mode, sign * value, r, t)


# -- invariant battery ------------------------------------------------------


@dataclass
class Check:
    """Worst-case residual of one invariant over the grid."""

    name: str
    worst: float = 0.0
    where: tuple = ()
    failures: int = 0

    def update(self, residual: float, point, tol: float) -> None:
        residual = float(residual)
        # NaN never compares <=, so it is both recorded and counted as a failure
        if not self.where or (not math.isnan(self.worst) and not residual <= self.worst):
            self.worst, self.where = residual, point
        if not residual <= tol:
            self.failures += 1

    @property
    def passed(self) -> bool:
        return self.failures == 0


#: Faults that :func:`verify` can inject to prove the battery detects them.
FAULTS = ("eps23-sign",)


def verify(tol: float = 1e-9, grid: SweepGrid = VERIFY_GRID, fault: Optional[str] = None) -> list[Check]:
    """Runs every invariant over ``grid``; a check passes when its residual <= tol.

    Pure-state determinant conditions are evaluated in extended precision on
    the dynamics-built covariance matrix.
    """
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    names = [
        "det_sigma_eq_1",
        "delta_123_eq_3",
        "det_pair_eq_det_single",
        "oracle_equivalence",
        "closed_form_invariants",
        "ppt_symmetry_1_vs_2",
        "ppt_middle_eq_1",
        "monogamy",
    ]
    checks = {n: Check(n) for n in names}
    for r, t in grid.points():
        point = (r, t)
        system = SystemParams(theta=t, r=r)
        config = MeasurementConfig(system)
        with precision.extended() as lib:
            hp = pure_state_conditions(evolve(config, lib).cov)
        _, normal, inv = prepared_state(config)
        checks["det_sigma_eq_1"].update(abs(hp.det - 1), point, tol)
        checks["delta_123_eq_3"].update(abs(hp.delta - 3), point, tol)
        checks["det_pair_eq_det_single"].update(hp.pair_defect, point, tol)

        cm = evolve(config).cov
        blocks = closed_form_blocks(system)
        if fault == "eps23-sign":
            blocks["eps23"] = -blocks["eps23"]
        oracle = assemble_blocks(blocks)
        checks["oracle_equivalence"].update(np.max(np.abs(cm - oracle)), point, tol)

        closed = closed_form_invariants(system)
        checks["closed_form_invariants"].update(max(abs(x - y) for x, y in zip(inv, closed)), point, tol)

        spectra = _spectra(normal)
        checks["ppt_symmetry_1_vs_2"].update(
            np.max(np.abs(spectra[1].values - spectra[2].values)), point, tol
        )
        checks["ppt_middle_eq_1"].update(
            max(abs(s.values[1] - 1) for s in spectra.values()), point, tol
        )
        rep = renyi2_report(inv)
        checks["monogamy"].update(-min(rep.residual.values()), point, tol)
    return list(checks.values())
