import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state, states
from fnls.fourier import (
    FourierState,
    bracket_multiplier,
    cubic_array,
    cubic_convolution,
    embed,
    l2_pairing,
    project,
    sobolev_norm,
)


def brute_cubic(u: np.ndarray) -> dict:
    """Direct triple sum on the extended support ``|n| <= 3N``."""
    N = (u.size - 1) // 2
    out = {}
    rng = range(-N, N + 1)
    for n1, n2, n3 in itertools.product(rng, rng, rng):
        n = n1 - n2 + n3
        out[n] = out.get(n, 0) + u[n1 + N] * np.conj(u[n2 + N]) * u[n3 + N]
    return out


def test_state_invariants():
    with pytest.raises(ValueError):
        FourierState(2, np.zeros(4))
    with pytest.raises(ValueError):
        FourierState(1, np.array([0, np.nan, 0]))
    assert FourierState.zeros(3).is_zero()


def test_json_roundtrip(rng):
    x = random_state(rng, 3)
    data = json.loads(x.to_json())
    assert set(data) == {"n_max", "re", "im"}
    assert len(data["re"]) == 7
    y = FourierState.from_json(x.to_json())
    assert np.array_equal(x.coeffs, y.coeffs)


def test_project_examples(rng):
    assert project(FourierState.zeros(4), 2).is_zero()
    x = random_state(rng, 3)
    assert np.array_equal(project(x, 5).coeffs, x.coeffs)
    y = FourierState.from_modes(2, {-2: 1.0, 0: 2.0, 2: 3.0})
    p = project(y, 1)
    assert p.n_max == 1
    assert np.array_equal(p.coeffs, [0, 2.0, 0])


@given(states(), st.integers(0, 10))
def test_project_idempotent(x, M):
    once = project(x, M)
    assert np.array_equal(project(once, M).coeffs, once.coeffs)


def test_sobolev_examples():
    assert sobolev_norm(FourierState.zeros(2), 1.3) == 0
    assert sobolev_norm(FourierState.from_modes(0, {0: 1}), 7.0) == 1
    assert sobolev_norm(FourierState.from_modes(1, {1: 1}), 1.0) == pytest.approx(np.sqrt(2), abs=1e-15)


@given(states())
def test_plancherel(x):
    assert sobolev_norm(x, 0.0) ** 2 == pytest.approx(np.sum(np.abs(x.coeffs) ** 2), rel=1e-14, abs=1e-300)


def test_bracket_examples(rng):
    x = random_state(rng, 4)
    assert np.array_equal(bracket_multiplier(x, 0).coeffs, x.coeffs)
    y = bracket_multiplier(FourierState.from_modes(2, {2: 1}), 2.0)
    assert y[2] == pytest.approx(5.0, abs=1e-14)


@given(states(), st.floats(-4, 4))
def test_bracket_inverse_pair(x, p):
    back = bracket_multiplier(bracket_multiplier(x, p), -p)
    assert np.allclose(back.coeffs, x.coeffs, rtol=1e-13, atol=1e-300)


def test_l2_pairing_convention():
    f = FourierState.from_modes(1, {1: 1j})
    g = FourierState.from_modes(1, {1: 2.0})
    assert l2_pairing(f, g) == 2j


def test_cubic_examples():
    assert cubic_convolution(FourierState.zeros(3)).is_zero()
    single = cubic_convolution(FourierState.from_modes(1, {1: 2.0}))
    assert single[1] == pytest.approx(8.0)
    assert np.allclose(np.delete(single.coeffs, single.n_max + 1), 0)
    # u0 = u1 = 1, N = 1: enumerate the 8 triples from {0,1}^3
    u = np.array([0, 1, 1], dtype=complex)
    full = cubic_array(u, 3)
    expected = {n: 0 for n in range(-3, 4)}
    for n1, n2, n3 in itertools.product((0, 1), repeat=3):
        expected[n1 - n2 + n3] += 1
    assert [expected[n] for n in (-1, 0, 1, 2)] == [1, 3, 3, 1]
    assert np.allclose(full, [expected[n] for n in range(-3, 4)], atol=1e-14)


@pytest.mark.parametrize("N", range(0, 9))
def test_cubic_matches_direct_sum(N):
    rng = np.random.default_rng(N)
    for _ in range(3):
        u = random_state(rng, N, scale=3.0).coeffs
        ref = brute_cubic(u)
        got = cubic_array(u, 3 * N)
        want = np.array([ref.get(n, 0) for n in range(-3 * N, 3 * N + 1)])
        scale = np.max(np.abs(u)) ** 3 * (2 * N + 1) ** 2
        assert np.max(np.abs(got - want)) <= 1e-12 * scale


@given(states(max_n=6))
def test_cubic_projection_consistent(x):
    N = x.n_max
    full = cubic_convolution(x)
    assert full.n_max == 3 * N
    assert np.allclose(project(full, N).coeffs, cubic_array(x.coeffs, N), rtol=1e-12, atol=1e-12)


@given(states(max_n=6))
def test_cubic_preserves_hermitian_symmetry(x):
    u = x.coeffs
    sym = 0.5 * (u + np.conj(u[::-1]))
    c = cubic_array(sym, 3 * x.n_max)
    assert np.allclose(c, np.conj(c[::-1]), atol=1e-12)


def test_embed_pads_with_zeros(rng):
    x = random_state(rng, 2)
    y = embed(x, 4)
    assert y.n_max == 4
    assert np.array_equal(project(y, 2).coeffs, x.coeffs)
