import csv
import json
import os

import numpy as np
import pytest

import fnls.turbulence as turbulence
from fnls.dynamics import FlowParams
from fnls.errors import OverflowGuard
from fnls.measures import MCEstimate, MeasureSpec, mc_expectation
from fnls.turbulence import (
    TwoPointResult,
    twopoint_compare,
    twopoint_direct,
    twopoint_direct_table,
    twopoint_reweighted,
    twopoint_reweighted_table,
)

REFERENCE = os.path.join(os.path.dirname(__file__), "data", "twopoint_reference.json")


def within(est, target, k=3.0):
    return abs(est.mean - target) <= k * est.stderr


def test_time_zero_is_prior_moment():
    spec, p = MeasureSpec(1.0, 2), FlowParams(1.0, n_max=2)
    for n in range(-2, 3):
        target = (1 + n * n) ** -1.0
        assert within(twopoint_direct(n, 0.0, spec, p, 20000, 3), target)
        assert within(twopoint_reweighted(n, 0.0, spec, p, 20000, 4), target)


def test_single_mode_density_is_one():
    spec, p = MeasureSpec(1.0, 0), FlowParams(1.0, n_max=0)
    est = twopoint_reweighted(0, 0.3, spec, p, 20000, 5, quad_steps=16)
    plain = mc_expectation(lambda c: np.abs(c[:, 0]) ** 2, spec, 20000, 5, batched=True)
    assert est.mean == pytest.approx(plain.mean, rel=1e-14)
    assert within(est, 1.0)


def test_degenerate_cutoff_limit():
    r = 0.05
    est = twopoint_direct(0, 0.2, MeasureSpec(1.0, 0, r), FlowParams(1.0, n_max=0), 200, 6)
    assert 0 <= est.mean <= r * r
    assert est.n_rejected > 0


def test_parseval_sum():
    spec, p = MeasureSpec(1.0, 2), FlowParams(1.0, "focusing", 2)
    ests = twopoint_direct_table(range(-2, 3), 0.2, spec, p, 4096, 7)
    mass = mc_expectation(lambda c: np.sum(np.abs(c) ** 2, axis=1), spec, 4096, 7, batched=True)
    assert sum(e.mean for e in ests) == pytest.approx(mass.mean, rel=1e-8)


def test_table_matches_single_mode():
    spec, p = MeasureSpec(1.0, 1), FlowParams(1.0, n_max=1)
    table = twopoint_direct_table([0, 1], 0.1, spec, p, 1000, 8)
    assert table[1] == twopoint_direct(1, 0.1, spec, p, 1000, 8)


def test_mode_range_checked():
    spec, p = MeasureSpec(1.0, 1), FlowParams(1.0, n_max=1)
    with pytest.raises(ValueError):
        twopoint_direct(2, 0.1, spec, p, 10, 1)
    with pytest.raises(ValueError):
        twopoint_direct(0, 0.1, MeasureSpec(1.0, 2), p, 10, 1)


@pytest.mark.filterwarnings("ignore:overflow")
def test_overflow_guard(monkeypatch):
    monkeypatch.setattr(turbulence, "sample_log_density_array", lambda rows, *a: np.full(len(rows), 800.0))
    spec, p = MeasureSpec(1.0, 1), FlowParams(1.0, n_max=1)
    with pytest.raises(OverflowGuard) as info:
        twopoint_reweighted_table([0, 1], 0.1, spec, p, 100, 1)
    assert info.value.n_saturated == 100
    assert len(info.value.estimate) == 2
    with pytest.raises(OverflowGuard) as info:
        twopoint_reweighted(0, 0.1, spec, p, 100, 1)
    assert isinstance(info.value.estimate, MCEstimate)


def test_result_z_and_csv(tmp_path):
    d = MCEstimate(0.5, 0.01, 100, 1)
    r = MCEstimate(0.52, 0.02, 1000, 2)
    res = TwoPointResult.compare(1, 0.2, d, r)
    assert res.z_score == pytest.approx(0.02 / np.hypot(0.01, 0.02))
    path = tmp_path / "tp.csv"
    res.append_csv(path)
    res.append_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == list(TwoPointResult.CSV_HEADER)
    assert len(rows) == 3


def test_compare_small():
    spec, p = MeasureSpec(1.0, 1), FlowParams(1.0, n_max=1)
    res = twopoint_compare([0, 1], 0.1, spec, p, 8192, 8192, 11, quad_steps=32)
    assert [r.n for r in res] == [0, 1]
    assert all(r.z_score < 4 for r in res)


@pytest.mark.skipif(not os.path.exists(REFERENCE), reason="reference not generated")
def test_pinned_reference():
    with open(REFERENCE) as fh:
        ref = json.load(fh)
    target = MCEstimate(**ref["modes"]["1"])
    spec = MeasureSpec(ref["s"], ref["n_max"])
    p = FlowParams(ref["alpha"], ref["sign"], ref["n_max"])
    est = twopoint_direct(1, ref["t"], spec, p, 100000, 99)
    assert est.z_against(target) < 3


@pytest.mark.skipif(not os.path.exists(REFERENCE), reason="reference not generated")
def test_pinned_reference_conserves_expected_mass():
    # E||u(t)||^2 = E||phi||^2 = sum <n>^{-2s}, so the pinned modes must sum to it
    with open(REFERENCE) as fh:
        ref = json.load(fh)
    modes = ref["modes"]
    total = modes["0"]["mean"] + 2 * (modes["1"]["mean"] + modes["2"]["mean"])
    err = np.sqrt(modes["0"]["stderr"] ** 2 + 4 * (modes["1"]["stderr"] ** 2 + modes["2"]["stderr"] ** 2))
    assert abs(total - (1 + 2 * (0.5 + 0.2))) < 3 * err + 1e-9
