"""Truncated cubic fractional NLS on the torus.

Equation, mode by mode, for ``|n| <= N``::

    i d/dt u_n + |n|^{2 alpha} u_n = sign * pi_N(|u|^2 u)_n
    d/dt u_n = i |n|^{2 alpha} u_n - i * sign * C_n(u)

with ``sign = +1`` (focusing) or ``-1`` (defocusing) and ``C`` the exact cubic
convolution.  The free flow is therefore ``u_n(t) = exp(+i t |n|^{2 alpha}) u_n(0)``.

Time stepping uses the interaction picture: on each step the linear phases
are factored out exactly and the remaining nonlinear ODE is advanced with
the Dormand-Prince 5(4) pair under a PI step-size controller.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import StepFailure
from .fourier import FourierState, cubic_array, frequencies, n_max_of

SIGNS = {"focusing": 1, "defocusing": -1}
DT_MIN = 1e-12
GROUP_SIZE = 256


@dataclass(frozen=True)
class FlowParams:
    """Everything that determines the truncated dynamics.

    ``nonlinear=False`` switches the cubic term off (free evolution), which is
    only used to check the interaction-picture machinery.
    """

    alpha: float
    sign: str = "defocusing"
    n_max: int = 8
    dt_max: float = 0.05
    rel_tol: float = 1e-10
    nonlinear: bool = True

    def __post_init__(self):
        if not self.alpha > 0.5:
            raise ValueError("alpha must exceed 0.5")
        if self.sign not in SIGNS:
            raise ValueError(f"sign must be one of {sorted(SIGNS)}")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if not (0 < self.rel_tol <= 1e-2):
            raise ValueError("rel_tol must lie in (0, 1e-2]")

    @property
    def sign_value(self) -> int:
        return SIGNS[self.sign]

    def omega(self) -> np.ndarray:
        """Linear frequencies ``|n|^{2 alpha}``."""
        return np.abs(frequencies(self.n_max)).astype(float) ** (2 * self.alpha)

    def replace(self, **changes) -> "FlowParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    params: FlowParams
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if any(st.n_max != self.params.n_max for st in self.states):
            raise ValueError("all states must share params.n_max")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "n", "re", "im"])
            for t, st in zip(self.times, self.states):
                for n, c in zip(st.n, st.coeffs):
                    w.writerow([repr(float(t)), int(n), repr(float(c.real)), repr(float(c.imag))])

    @classmethod
    def read_csv(cls, path, params: FlowParams) -> "Trajectory":
        rows: dict[float, dict[int, complex]] = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                t = float(row["t"])
                rows.setdefault(t, {})[int(row["n"])] = float(row["re"]) + 1j * float(row["im"])
        times = sorted(rows)
        states = [FourierState.from_modes(params.n_max, rows[t]) for t in times]
        return cls(np.array(times), states, params)


def _nonlinear_term(u: np.ndarray, params: FlowParams) -> np.ndarray:
    """``-i * sign * pi_N C(u)`` on the last axis."""
    if not params.nonlinear:
        return np.zeros_like(u)
    N = n_max_of(u.shape[-1])
    return (-1j * params.sign_value) * cubic_array(u, N)


def vector_field_array(u: np.ndarray, params: FlowParams) -> np.ndarray:
    return 1j * params.omega() * u + _nonlinear_term(u, params)


def linear_propagator(state: FourierState, t: float, alpha: float) -> FourierState:
    """Free evolution ``u_n -> exp(i t |n|^{2 alpha}) u_n``."""
    omega = np.abs(state.n).astype(float) ** (2 * alpha)
    return FourierState(state.n_max, np.exp(1j * t * omega) * state.coeffs)


def vector_field(state: FourierState, params: FlowParams) -> FourierState:
    _check_truncation(state, params)
    return FourierState(state.n_max, vector_field_array(state.coeffs, params))


def _check_truncation(state: FourierState, params: FlowParams) -> None:
    if state.n_max != params.n_max:
        raise ValueError(
            f"state truncation {state.n_max} differs from params.n_max {params.n_max}"
        )


def integrate(
    u0: np.ndarray, times: Sequence[float], params: FlowParams, group_size: int = GROUP_SIZE
) -> tuple[np.ndarray, dict]:
    """Integrate a batch of states and record them at ``times``.

    ``u0`` has shape ``(..., 2N+1)``; ``times`` must be monotone away from 0
    (all >= 0 increasing, or all <= 0 decreasing).  Returns
    ``(states, stats)`` with ``states.shape == (len(times),) + u0.shape``.

    Rows are sorted by amplitude and advanced in groups of ``group_size``
    that share one step sequence, driven by the group's worst row.  A row's
    result therefore depends (to within tolerance) on its batch, but is a
    deterministic function of the batch contents.
    """
    u = np.ascontiguousarray(u0, dtype=np.complex128)
    if n_max_of(u.shape[-1]) != params.n_max:
        raise ValueError("state truncation differs from params.n_max")
    times = np.ascontiguousarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be one-dimensional")
    lead = u.shape[:-1]
    rows = u.reshape(-1, u.shape[-1])
    stats = {"n_steps": 0, "n_rejected": 0}
    if len(times) == 0:
        return np.empty((0,) + u.shape, dtype=np.complex128), stats
    direction = 1.0 if times[-1] >= 0 else -1.0
    d = np.diff(np.concatenate([[0.0], times])) * direction
    if np.any(d < 0):
        raise ValueError("times must be monotone away from 0")

    omega = params.omega()
    g = (-1j * params.sign_value) if params.nonlinear else 0j
    out = np.empty((len(times),) + rows.shape, dtype=np.complex128)
    order = np.argsort(np.max(np.abs(rows), axis=-1), kind="stable")
    for start in range(0, rows.shape[0], max(1, group_size)):
        sel = order[start : start + group_size]
        block = np.ascontiguousarray(rows[sel])
        h0 = _initial_step(block, omega, g, params)
        res, n_steps, n_rej, status, t_fail = _kernels.integrate_rows(
            block, times, omega, g, params.rel_tol, params.dt_max, DT_MIN, h0
        )
        stats["n_steps"] += int(n_steps)
        stats["n_rejected"] += int(n_rej)
        if status != 0:
            raise StepFailure(
                f"step size fell below {DT_MIN:g} at t={t_fail:.6g} "
                f"(alpha={params.alpha}, N={params.n_max}, rel_tol={params.rel_tol:g})",
                t=float(t_fail),
                dt=DT_MIN,
            )
        out[:, sel] = res
    return out.reshape((len(times),) + lead + (u.shape[-1],)), stats


def _initial_step(rows: np.ndarray, omega, g, params: FlowParams) -> float:
    if rows.size == 0 or g == 0:
        return params.dt_max
    scale = float(np.max(np.abs(rows)))
    rate = float(np.max(np.abs(cubic_array(rows, params.n_max))))
    if scale == 0.0 or rate == 0.0:
        return params.dt_max
    return min(params.dt_max, 0.2 * params.rel_tol ** 0.2 * scale / rate)


def evolve(state: FourierState, t_target: float, params: FlowParams) -> FourierState:
    """Flow map ``Phi_{N,t}``; negative ``t_target`` runs the flow backward."""
    _check_truncation(state, params)
    if t_target == 0:
        return state
    out, _ = integrate(state.coeffs, [t_target], params)
    return FourierState(state.n_max, out[0])


def trajectory(state: FourierState, times: Sequence[float], params: FlowParams) -> Trajectory:
    """States of the flow at the given (increasing, nonnegative) times."""
    _check_truncation(state, params)
    times = np.asarray(times, dtype=float)
    if times[0] < 0:
        raise ValueError("trajectory times must be nonnegative")
    start = times[0] == 0.0
    run_times = times[1:] if start else times
    out, stats = integrate(state.coeffs, run_times, params)
    states = [FourierState(state.n_max, c) for c in out]
    if start:
        states.insert(0, state)
    return Trajectory(times, states, params, stats)


def quartic_sum_array(u: np.ndarray) -> np.ndarray:
    """``sum_{n1-n2+n3-n4=0} u1 conj(u2) u3 conj(u4)`` over ``|n_i| <= N`` (real)."""
    N = n_max_of(u.shape[-1])
    c = cubic_array(u, N)
    return np.sum(c * np.conj(u), axis=-1).real


def hamiltonian(state: FourierState, params: FlowParams) -> float:
    """``1/2 sum |n|^{2a}|u_n|^2 - sign/4 * quartic``; conserved by the flow.

    For the defocusing sign the quartic enters with ``+1/4``.
    """
    _check_truncation(state, params)
    u = state.coeffs
    kinetic = 0.5 * float(np.sum(params.omega() * np.abs(u) ** 2))
    if not params.nonlinear:
        return kinetic
    return kinetic - 0.25 * params.sign_value * float(quartic_sum_array(u))


def divergence_check(state: FourierState, params: FlowParams, h: float) -> float:
    """Central-difference trace of the Jacobian of the real vector field.

    The real coordinates are ``(Re u_n, Im u_n)``; the trace vanishes for a
    Hamiltonian field (Liouville).
    """
    _check_truncation(state, params)
    if not h > 0:
        raise ValueError("h must be positive")
    u = state.coeffs
    dim = u.size
    eye = np.eye(dim, dtype=np.complex128)
    # Perturb every real coordinate in one batched evaluation.
    plus = np.concatenate([u + h * eye, u + 1j * h * eye])
    minus = np.concatenate([u - h * eye, u - 1j * h * eye])
    dp = vector_field_array(plus, params)
    dm = vector_field_array(minus, params)
    idx = np.arange(dim)
    d_re = (dp[idx, idx].real - dm[idx, idx].real) / (2 * h)
    d_im = (dp[dim + idx, idx].imag - dm[dim + idx, idx].imag) / (2 * h)
    return float(np.sum(d_re) + np.sum(d_im))
