import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import fnls.lemmas as lemmas
from fnls.errors import DegenerateQuadruple
from fnls.lemmas import (
    Quadruple,
    ScanReport,
    count_resonant_set,
    counting_profile,
    dmvt_residual,
    max_count_over_tau,
    nonresonant_quadruples,
    phase,
    psi,
    scan_min_phase,
    scan_phase_lower_bound,
    scan_psi_mean_value,
    scan_ratio_bound,
)

ints = st.integers(-60, 60)


@st.composite
def quadruples(draw):
    return Quadruple.from_three(draw(ints), draw(ints), draw(ints))


def test_quadruple_constraint():
    with pytest.raises(ValueError):
        Quadruple(1, 2, 3, 4)
    q = Quadruple.from_three(3, 2, 1)
    assert q == Quadruple(3, 2, 1, 2)
    assert q.n_max == 4
    assert Quadruple(5, 5, 2, 2).is_resonant()
    assert Quadruple(5, 2, 2, 5).is_resonant()
    assert not q.is_resonant()


def test_phase_examples():
    q = Quadruple(3, 2, 1, 2)
    assert phase(q, 1.0) == 2
    assert phase(q, 1.0) == -2 * (q.n4 - q.n1) * (q.n4 - q.n3)
    assert phase(Quadruple(1, 0, 1, 2), 2.0) == -14
    with pytest.raises(ValueError):
        phase(q, 0.0)


@given(quadruples())
def test_nls_factorization(q):
    assert phase(q, 1.0) == -2 * (q.n4 - q.n1) * (q.n4 - q.n3)


@given(ints, ints, st.floats(0.3, 3.0), st.floats(0.0, 2.0))
def test_resonant_quadruples_vanish(a, b, alpha, s):
    for q in (Quadruple(a, a, b, b), Quadruple(a, b, b, a)):
        assert phase(q, alpha) == 0
        assert psi(q, s) == 0


@given(quadruples())
def test_psi_one_equals_phase_one(q):
    assert psi(q, 1.0) == phase(q, 1.0)


def test_psi_example():
    assert psi(Quadruple(2, 1, 1, 2), 0.5) == 0


@given(quadruples(), st.floats(0.55, 2.5), st.floats(0.0, 2.0))
def test_symmetries(q, alpha, s):
    swap = Quadruple(q.n3, q.n2, q.n1, q.n4)
    flip = Quadruple(q.n2, q.n1, q.n4, q.n3)
    for f, p in ((phase, alpha), (psi, s)):
        v = f(q, p)
        tol = 1e-12 * max(1.0, abs(v), 60.0 ** (2 * p))
        assert abs(f(swap, p) - v) <= tol
        assert abs(f(flip, p) + v) <= tol


def test_nonresonant_enumeration():
    n1, n2, n3, n4 = nonresonant_quadruples(3)
    assert np.all(n4 == n1 - n2 + n3)
    assert np.all(np.abs(n4) <= 3)
    assert not np.any((n2 == n1) | (n2 == n3))
    brute = sum(
        1
        for a in range(-3, 4)
        for b in range(-3, 4)
        for c in range(-3, 4)
        if abs(a - b + c) <= 3 and b not in (a, c)
    )
    assert n1.size == brute


def test_count_examples():
    assert count_resonant_set(0, 50, 1, 1.0) == 2
    assert count_resonant_set(2, 2, 1, 1.0) == 1
    assert count_resonant_set(5, -10, 1, 1.0) == 0
    with pytest.raises(ValueError):
        count_resonant_set(0, 1, 0.5, 1.0)


@given(st.integers(-15, 15), st.floats(-20, 3000), st.floats(1, 50), st.sampled_from([0.75, 1.0, 1.5, 2.0]))
def test_count_matches_wide_scan(n, tau, M, alpha):
    n1 = np.arange(-400, 401)
    g = np.abs(n1) ** (2 * alpha) + np.abs(n - n1) ** (2 * alpha)
    assert count_resonant_set(n, tau, M, alpha) == np.count_nonzero(np.abs(g - tau) <= M)


@given(st.integers(-10, 10), st.floats(1, 64), st.sampled_from([1.0, 1.5, 2.0]))
def test_max_count_over_tau_is_maximal(n, M, alpha):
    best, tau = max_count_over_tau(n, M, alpha, 2000.0)
    assert 0 <= tau <= 2000
    assert count_resonant_set(n, tau, M, alpha) == best
    for t in np.linspace(0, 2000, 301):
        assert count_resonant_set(n, t, M, alpha) <= best


def test_counting_normalization_bounded():
    Ms = [2.0**k for k in range(11)]
    for alpha in (1.0, 1.5, 2.0):
        prof = counting_profile(alpha, Ms)
        assert int(np.argmax(prof)) <= 2  # maximum at M <= 4
        assert prof[-1] <= prof[0]


@pytest.mark.parametrize("scale", [4, 16, 32])
def test_phase_bound_nls_exact(scale):
    assert scan_phase_lower_bound(1.0, scale).extremal_constant == 2.0


def test_phase_bound_fourth_order_witness():
    rep = scan_phase_lower_bound(2.0, 32)
    q = Quadruple(-1, 0, 1, 0)
    # |Phi_2| = 2, |n4-n1||n4-n3| = 1, n_max^{2} = 4
    assert phase(q, 2.0) == 2
    assert rep.extremal_constant == pytest.approx(0.5, abs=1e-15)
    assert phase(rep.witness, 2.0) / (abs(rep.witness.n4 - rep.witness.n1) * abs(rep.witness.n4 - rep.witness.n3)) / rep.witness.n_max**2 == pytest.approx(0.5)


@pytest.mark.xfail(strict=True, reason="quadruple (-1,0,1,0) gives 0.5 under n_max = max|n_i| + 1")
def test_phase_bound_fourth_order_at_least_two():
    assert scan_phase_lower_bound(2.0, 32).extremal_constant >= 2


def test_phase_bound_weak_dispersion_stable():
    vals = [scan_phase_lower_bound(0.75, k).extremal_constant for k in (32, 64, 128)]
    assert min(vals) > 0
    assert max(vals) / min(vals) <= 2


def test_ratio_examples():
    assert scan_ratio_bound(1.0, 1.0, 32).extremal_constant == 1.0
    vals = [scan_ratio_bound(0.8, 0.6, k).extremal_constant for k in (32, 64, 128)]
    assert np.all(np.isfinite(vals))
    assert max(vals) / min(vals) <= 2


def test_ratio_fourth_order_witness():
    rep = scan_ratio_bound(2.0, 1.0, 32)
    q = Quadruple(-1, 0, 1, 0)
    # Psi_1 = 2, Phi_2 = 2, n_max^{2a-2s} = 2^2
    assert psi(q, 1.0) / phase(q, 2.0) * q.n_max**2 == 4
    assert rep.extremal_constant == 4.0


@pytest.mark.xfail(strict=True, reason="quadruple (-1,0,1,0) gives 4 under n_max = max|n_i| + 1")
def test_ratio_fourth_order_at_most_one():
    assert scan_ratio_bound(2.0, 1.0, 32).extremal_constant <= 1


def test_ratio_degenerate_guard(monkeypatch):
    monkeypatch.setattr(lemmas, "phase_array", lambda *a: np.zeros(np.shape(a[0])))
    with pytest.raises(DegenerateQuadruple) as info:
        scan_ratio_bound(1.0, 1.0, 4)
    assert not info.value.quadruple.is_resonant()


def test_scan_preconditions():
    with pytest.raises(ValueError):
        scan_phase_lower_bound(1.0, 257)
    with pytest.raises(ValueError):
        scan_ratio_bound(1.0, 0.4, 8)
    with pytest.raises(ValueError):
        scan_phase_lower_bound(0.5, 8)


def test_scan_matches_brute_force():
    alpha, scale = 0.75, 6
    best, count = np.inf, 0
    r = range(-(scale - 1), scale)
    for a in r:
        for b in r:
            for c in r:
                d = a - b + c
                if abs(d) >= scale or b in (a, c):
                    continue
                q = Quadruple(a, b, c, d)
                v = abs(phase(q, alpha)) / (abs(d - a) * abs(d - c) * q.n_max ** (2 * alpha - 2))
                best = min(best, v)
                count += 1
    rep = scan_phase_lower_bound(alpha, scale)
    assert rep.n_tuples == count
    assert rep.extremal_constant == pytest.approx(best, rel=1e-14)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
def test_psi_mean_value_stable(s):
    a = scan_psi_mean_value(s, 32).extremal_constant
    b = scan_psi_mean_value(s, 64).extremal_constant
    assert 0 < a and 0 < b
    assert max(a, b) / min(a, b) <= 2


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.6, 0.75, 1.0, 1.5, 2.0])
def test_nonresonant_phase_never_vanishes(alpha):
    assert scan_min_phase(alpha, 256).extremal_constant >= 1e-9


def test_dmvt_examples():
    assert dmvt_residual([0, 0, 1], 0.3, -1.7, 2.2, 2) < 1e-12
    assert dmvt_residual([1, -2, 3, 5], 0.0, 1.0, 0.0, 4) == 0
    assert dmvt_residual([0, 0, 0, 0, 1], 1.0, 0.5, 0.25, 64) < 1e-10
    with pytest.raises(ValueError):
        dmvt_residual([1], 0, 0, 0, 1)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=4), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_dmvt_exact_for_cubics(coeffs, xi, eta, lam):
    assert dmvt_residual(coeffs, xi, eta, lam, 2) < 1e-10


def test_dmvt_fourth_order():
    c = [0, 0, 0, 0, 0, 0, 1]
    r = [dmvt_residual(c, 0.5, 1.0, 1.5, g) for g in (4, 8, 16)]
    assert r[0] / r[1] == pytest.approx(16, rel=0.15)
    assert r[1] / r[2] == pytest.approx(16, rel=0.15)


def test_scan_csv(tmp_path):
    rep = ScanReport(32, 1.0, Quadruple(3, 2, 1, 2), 10)
    path = tmp_path / "scan.csv"
    rep.append_csv(path, 1.0, 1.0)
    rep.append_csv(path, 1.0, 1.0)
    rows = list(csv.reader(open(path)))
    assert rows[0] == list(ScanReport.CSV_HEADER)
    assert len(rows) == 3
    assert rows[1] == ["1.0", "1.0", "32", "1.0", "3", "2", "1", "2", "10"]
