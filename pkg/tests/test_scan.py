import csv
import io
import json
import math

import numpy as np
import pytest

from akscan import scan
from akscan.scan import (
    ENTANGLEMENT_FIELDS,
    FIELDS,
    SweepGrid,
    branch_occupancy,
    evaluate_point,
    evaluate_point_full,
    extremize,
    golden_section_max,
    point_report,
    quantity_function,
    rows_to_csv,
    rows_to_json,
    sweep,
    verify,
    worker_count,
)

SMALL = SweepGrid(r_min=-1, r_max=1, r_steps=3, theta_min=0, theta_max=math.pi, theta_steps=4)


def entanglement_values(row):
    return [getattr(row, f) for f in ENTANGLEMENT_FIELDS]


def test_grid_points_and_validation():
    g = SweepGrid(r_steps=2, theta_steps=2)
    assert g.points() == [(-5.0, 0.0), (-5.0, 2 * math.pi), (5.0, 0.0), (5.0, 2 * math.pi)]
    assert len(SweepGrid().points()) == 201 * 181
    for bad in (dict(r_steps=1), dict(r_min=1, r_max=0), dict(theta_max=math.inf)):
        with pytest.raises(ValueError):
            SweepGrid(**bad)


def test_default_grid_resolves_quarter_period():
    step = SweepGrid().theta_values[1]
    assert (math.pi / 2) / step == pytest.approx(45)


def test_row_at_vacuum():
    row = evaluate_point(0.0, 0.0)
    assert row.nu3_f1 == pytest.approx(2 - math.sqrt(3), abs=1e-12)
    assert row.nu3_f3 == pytest.approx(3 - math.sqrt(8), abs=1e-12)
    assert row.E_res_d == pytest.approx(math.log(6 / 5), abs=1e-12)
    assert row.giedke_class == "C1"
    assert row.g_branch == "ratio"


def test_row_and_spectra_consistent():
    row, spectra = evaluate_point_full(1.3, 0.4)
    assert row.nu3_f2 == spectra[2].min
    assert row.nu2_f1 == spectra[1].values[1]


def test_displacement_invariance(rng):
    for _ in range(10):
        r, t = rng.uniform(-5, 5), rng.uniform(0, 2 * math.pi)
        base = evaluate_point(r, t)
        moved = evaluate_point(r, t, q=rng.normal(scale=5), p=rng.normal(scale=5))
        assert entanglement_values(moved) == entanglement_values(base)


def test_quarter_period(rng):
    for _ in range(10):
        r, t = rng.uniform(-5, 5), rng.uniform(0, 2 * math.pi)
        a, b = evaluate_point(r, t), evaluate_point(r, t + math.pi / 2)
        assert a.giedke_class == b.giedke_class and a.g_branch == b.g_branch
        for f in ENTANGLEMENT_FIELDS[:-2]:
            assert abs(getattr(a, f) - getattr(b, f)) <= 1e-10, f


def test_point_report_contents():
    rep = point_report(0.0, 0.0, q=3.0, p=-2.0)
    assert rep["giedke_class"] == "C1"
    assert rep["balance"] == pytest.approx(1.0)
    assert set(rep["ppt_spectra"]) == {"1|23", "2|13", "3|12"}
    nu = rep["ppt_spectra"]["1|23"]["nu_tilde"]
    assert nu[0] >= nu[1] >= nu[2]
    assert rep["renyi2"]["reduced"]["1|3"] == pytest.approx(math.log(5 / 3))
    assert rep["noise"]["dx1p_sq"] == pytest.approx(2.0)
    assert rep["mean"][0] == pytest.approx(3.0)
    json.dumps(rep)


def test_csv_format():
    text = rows_to_csv(sweep(SMALL, workers=1))
    assert "\r" not in text and text.endswith("\n")
    lines = text.split("\n")[:-1]
    assert lines[0].split(",") == FIELDS
    assert len(lines) == 1 + 12
    record = next(csv.DictReader(io.StringIO(text)))
    mantissa, _, exponent = record["nu3_f1"].partition("e")
    assert len(mantissa.replace("-", "").replace(".", "")) == 17
    assert exponent[0] in "+-"


def test_json_mirrors_csv():
    rows = sweep(SMALL, workers=1)
    data = json.loads(rows_to_json(rows))
    assert len(data) == len(rows)
    assert all(isinstance(v, (int, float, str)) for obj in data for v in obj.values())
    assert list(data[0]) == FIELDS


def test_sweep_is_deterministic_and_worker_independent():
    one = rows_to_csv(sweep(SMALL, workers=1))
    assert rows_to_csv(sweep(SMALL, workers=1)) == one
    assert rows_to_csv(sweep(SMALL, workers=3)) == one


def test_branch_occupancy():
    rows = sweep(SMALL, workers=1)
    counts = branch_occupancy(rows)
    assert sum(counts.values()) == len(rows)
    assert set(counts) <= {"unit", "beta", "ratio"}


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("AK_SCAN_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("AK_SCAN_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("AK_SCAN_THREADS", "-2")
    with pytest.raises(ValueError):
        worker_count()


def test_golden_section_max():
    x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2, -2, 2)
    assert x == pytest.approx(0.3, abs=1e-6) and fx == pytest.approx(0.0, abs=1e-12)
    x, _ = golden_section_max(lambda x: x, 0, 1)
    assert x == 1


def test_quantity_function_rejects_unknown():
    with pytest.raises(KeyError):
        quantity_function("nope")
    with pytest.raises(KeyError):
        quantity_function("theta")


def test_extremize_pinned_r():
    ext = extremize("E_ds", "min", fixed_r=5.0)
    assert ext.r == 5.0
    assert ext.value == pytest.approx(0.5 * math.log(2), abs=1e-4)
    assert ext.theta % (math.pi / 2) == pytest.approx(math.pi / 4, abs=1e-3)


def test_extremize_pinned_theta():
    ext = extremize("E_dds", "min", fixed_theta=0.7)
    assert ext.theta == 0.7
    assert ext.value == pytest.approx(math.log(2), abs=1e-9)


def test_extremize_rejects_mode():
    with pytest.raises(ValueError):
        extremize("E_ds", "median")


def test_verify_battery_passes():
    checks = verify()
    assert [c.name for c in checks if not c.passed] == []
    assert {c.name for c in checks} >= {"det_sigma_eq_1", "delta_123_eq_3", "oracle_equivalence", "monogamy"}


def test_verify_detects_injected_fault():
    grid = SweepGrid(r_steps=5, theta_steps=5)
    failed = [c.name for c in verify(grid=grid, fault="eps23-sign") if not c.passed]
    assert failed == ["oracle_equivalence"]
    with pytest.raises(ValueError):
        verify(grid=grid, fault="other")


def test_verify_tiny_tolerance_reports_failures():
    checks = verify(tol=1e-15, grid=SweepGrid(r_steps=5, theta_steps=5))
    assert any(not c.passed for c in checks)
    for c in checks:
        assert math.isfinite(c.worst) and len(c.where) == 2


def test_check_update_tracks_worst_and_nan():
    c = scan.Check("x")
    c.update(1e-3, (0, 0), 1e-2)
    c.update(5e-3, (1, 1), 1e-2)
    c.update(2e-3, (2, 2), 1e-2)
    assert c.worst == 5e-3 and c.where == (1, 1) and c.passed
    c.update(float("nan"), (3, 3), 1e-2)
    assert not c.passed and math.isnan(c.worst)
