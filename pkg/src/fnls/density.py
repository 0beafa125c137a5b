"""Density of the transported Gaussian measure and its energy functionals.

For the truncated flow ``Phi_t`` and ``mu_{s,N}`` the density of
``(Phi_t)_* mu`` with respect to ``mu`` is, in two equivalent forms,

    log f(t, phi) = 1/2 ||phi||_{H^s}^2 - 1/2 ||Phi_{-t} phi||_{H^s}^2
                  = -sign * int_0^t I(u(-t')) dt',   u(-t') = Phi_{-t'} phi,

where ``I(u) = Re sum_n i C_n(u) <n>^{2s} conj(u_n)`` is the energy
integrand and ``C`` the projected cubic term.  The sign follows from
``d/dt 1/2 ||u||_{H^s}^2 = -sign * I(u)`` along the flow.

Only nonresonant quadruples contribute to ``I``.  Symmetrization gives
``I = 1/4 Im sum Psi_s u1 conj(u2) u3 conj(u4)``, and an integration by
parts in time splits the time integral into a boundary term and two
sextic remainders.

The 1/2 in these formulas belongs to a Gaussian with unit variance in each
real coordinate.  The sampler draws ``E|g_n|^2 = 1`` (variance 1/2 per real
coordinate), whose law is ``exp(-||phi||_{H^s}^2)``; the density that
transports the sampled measure is therefore ``f^2``.  Monte Carlo code goes
through :func:`sample_log_density_array`, which applies that factor.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import simpson

from .dynamics import FlowParams, _check_truncation, integrate
from .errors import DegenerateQuadruple
from .fourier import FourierState, bracket_power, cubic_array, frequencies, n_max_of, sobolev_norm_array
from .lemmas import PHASE_ZERO, Quadruple, nonresonant_quadruples, phase_array, psi_array
from .measures import MCEstimate, MeasureSpec, mc_values, z_score
from .rng import child_seed

LAW_FACTOR = 2.0
MAX_N_SYMMETRIZED = 8
MAX_N_IBP = 6


@dataclass(frozen=True)
class DensityReport:
    log_f_norm: float
    log_f_integral: float
    quad_steps: int
    discrepancy: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class EnergyBreakdown:
    F_total: float
    boundary: float
    remainder1: float
    remainder2: float
    identity_residual: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def energy_integrand_array(u: np.ndarray, s: float) -> np.ndarray:
    N = n_max_of(u.shape[-1])
    c = cubic_array(u, N)
    w = bracket_power(frequencies(N), 2 * s)
    return -np.sum(c * w * np.conj(u), axis=-1).imag


def energy_integrand(state: FourierState, s: float) -> float:
    """``Re sum_n i C_n(u) <n>^{2s} conj(u_n)``."""
    return float(energy_integrand_array(state.coeffs, s))


def resonant_part(state: FourierState) -> FourierState:
    """Diagonal cubic term ``|u_n|^2 u_n``."""
    u = state.coeffs
    return FourierState(state.n_max, (u.real**2 + u.imag**2) * u)


def nonresonant_array(u: np.ndarray) -> np.ndarray:
    """``sum_{n1 - n2 + n3 = n, n1, n3 != n} u1 conj(u2) u3``.

    Removing ``n1 = n`` and ``n3 = n`` from the full sum subtracts
    ``2 ||u||^2 u_n`` and adds back the doubly removed ``|u_n|^2 u_n``.
    """
    N = n_max_of(u.shape[-1])
    mass = np.sum(u.real**2 + u.imag**2, axis=-1, keepdims=True)
    return cubic_array(u, N) - 2 * mass * u + (u.real**2 + u.imag**2) * u


def nonresonant_part(state: FourierState) -> FourierState:
    return FourierState(state.n_max, nonresonant_array(state.coeffs))


def resonant_pairing(state: FourierState, s: float) -> float:
    """``Im sum_n conj(R_n) <n>^{2s} u_n``; zero for every state."""
    r = resonant_part(state).coeffs
    w = bracket_power(state.n, 2 * s)
    return float(np.sum(np.conj(r) * w * state.coeffs).imag)


def _rows(phi) -> np.ndarray:
    return np.atleast_2d(np.asarray(phi, dtype=np.complex128))


def log_density_norm_array(rows: np.ndarray, t: float, params: FlowParams, s: float) -> np.ndarray:
    rows = _rows(rows)
    if t == 0:
        return np.zeros(rows.shape[0])
    back, _ = integrate(rows, [-t], params)
    return 0.5 * sobolev_norm_array(rows, s) ** 2 - 0.5 * sobolev_norm_array(back[0], s) ** 2


def log_density_norm(phi: FourierState, t: float, params: FlowParams, s: float) -> float:
    """``1/2 ||phi||_{H^s}^2 - 1/2 ||Phi_{-t} phi||_{H^s}^2``."""
    _check_truncation(phi, params)
    return float(log_density_norm_array(phi.coeffs, t, params, s)[0])


def _check_quad(quad_steps: int) -> None:
    if quad_steps < 2:
        raise ValueError("quad_steps must be >= 2")


def backward_nodes(rows: np.ndarray, T: float, params: FlowParams, quad_steps: int):
    """States on the uniform grid ``tau_k = -T k / quad_steps``.

    Returns ``(tau, states)`` with ``tau`` ascending from ``-T`` to 0 and
    ``states.shape == (quad_steps + 1, rows, 2N+1)``.  The integrator lands
    exactly on every node.
    """
    _check_quad(quad_steps)
    rows = _rows(rows)
    tau = -T * np.arange(quad_steps + 1) / quad_steps
    out, _ = integrate(rows, tau[1:], params)
    states = np.concatenate([rows[None], out])
    return tau[::-1].copy(), states[::-1].copy()


def log_density_integral_array(
    rows: np.ndarray, t: float, params: FlowParams, s: float, quad_steps: int
) -> np.ndarray:
    rows = _rows(rows)
    _check_quad(quad_steps)
    if t == 0:
        return np.zeros(rows.shape[0])
    tau, states = backward_nodes(rows, t, params, quad_steps)
    vals = energy_integrand_array(states, s)
    if not params.nonlinear:
        return np.zeros(rows.shape[0])
    return -params.sign_value * simpson(vals, x=tau, axis=0)


def log_density_integral(
    phi: FourierState, t: float, params: FlowParams, s: float, quad_steps: int = 512
) -> float:
    """``-sign * int_0^t I(Phi_{-t'} phi) dt'`` by composite Simpson."""
    _check_truncation(phi, params)
    return float(log_density_integral_array(phi.coeffs, t, params, s, quad_steps)[0])


def sample_log_density_array(
    rows: np.ndarray,
    t: float,
    params: FlowParams,
    s: float,
    method: str = "integral",
    quad_steps: int = 512,
) -> np.ndarray:
    """Log-density of ``(Phi_t)_* mu_{s,N}`` w.r.t. ``mu_{s,N}`` for the sampled law."""
    if method == "norm":
        return LAW_FACTOR * log_density_norm_array(rows, t, params, s)
    if method == "integral":
        return LAW_FACTOR * log_density_integral_array(rows, t, params, s, quad_steps)
    raise ValueError("method must be 'norm' or 'integral'")


def density_report(
    phi: FourierState, t: float, params: FlowParams, s: float, quad_steps: int = 512
) -> DensityReport:
    a = log_density_norm(phi, t, params, s)
    b = log_density_integral(phi, t, params, s, quad_steps)
    return DensityReport(a, b, int(quad_steps), abs(a - b))


def _quadruple_tables(N: int, alpha: float, s: float):
    n1, n2, n3, n4 = nonresonant_quadruples(N)
    ph = phase_array(n1, n2, n3, n4, alpha)
    ps = psi_array(n1, n2, n3, n4, s)
    return (n1 + N, n2 + N, n3 + N, n4 + N), ph, ps


def _fsum_imag(z: np.ndarray) -> float:
    return math.fsum(np.asarray(z).imag.tolist())


def _fsum_real(z: np.ndarray) -> float:
    return math.fsum(np.asarray(z).real.tolist())


def _simpson(vals, tau) -> float:
    return float(simpson(np.asarray(vals), x=tau))


def symmetrized_F(
    phi: FourierState, T: float, params: FlowParams, s: float, quad_steps: int = 512
) -> float:
    """``Im int_{-T}^0 sum Psi_s e^{i tau Phi} v1 conj(v2) v3 conj(v4) dtau``.

    ``v(tau) = e^{-i tau |n|^{2a}} u(tau)`` is the interaction variable and
    the sum runs over nonresonant quadruples in ``|n_i| <= N``.
    """
    _check_truncation(phi, params)
    if params.n_max > MAX_N_SYMMETRIZED:
        raise ValueError(f"symmetrized_F needs n_max <= {MAX_N_SYMMETRIZED}")
    N = params.n_max
    (i1, i2, i3, i4), ph, ps = _quadruple_tables(N, params.alpha, s)
    if i1.size == 0 or phi.is_zero():
        return 0.0
    tau, states = backward_nodes(phi.coeffs, T, params, quad_steps)
    omega = params.omega()
    vals = []
    for k, t in enumerate(tau):
        v = np.exp(-1j * t * omega) * states[k, 0]
        terms = ps * np.exp(1j * t * ph) * v[i1] * np.conj(v[i2]) * v[i3] * np.conj(v[i4])
        vals.append(_fsum_imag(terms))
    return _simpson(vals, tau)


def nonresonant_time_integral(
    phi: FourierState, T: float, params: FlowParams, s: float, quad_steps: int = 512
) -> float:
    """``int_{-T}^0 Re sum_n i N_n(u) <n>^{2s} conj(u_n) dtau`` from the convolution."""
    _check_truncation(phi, params)
    tau, states = backward_nodes(phi.coeffs, T, params, quad_steps)
    u = states[:, 0]
    w = bracket_power(phi.n, 2 * s)
    vals = -np.sum(nonresonant_array(u) * w * np.conj(u), axis=-1).imag
    return _simpson(vals, tau)


def ibp_decomposition(
    phi: FourierState, T: float, params: FlowParams, s: float, quad_steps: int = 512
) -> EnergyBreakdown:
    """Split ``F`` into ``N0(0) - N0(-T) + N1 + N2``.

    With ``r = Psi_s / Phi_a`` and ``P(u) = u1 conj(u2) u3 conj(u4)``:
    ``N0 = -Re sum r P(u)``,
    ``N1 = 2 sign Im int sum r C_{n1} conj(u2) u3 conj(u4)``,
    ``N2 = -2 sign Im int sum r u1 conj(C_{n2}) u3 conj(u4)``.
    """
    _check_truncation(phi, params)
    if params.n_max > MAX_N_IBP:
        raise ValueError(f"ibp_decomposition needs n_max <= {MAX_N_IBP}")
    N = params.n_max
    (i1, i2, i3, i4), ph, ps = _quadruple_tables(N, params.alpha, s)
    bad = np.flatnonzero(np.abs(ph) < PHASE_ZERO)
    if bad.size:
        k = bad[0]
        q = Quadruple(int(i1[k] - N), int(i2[k] - N), int(i3[k] - N), int(i4[k] - N))
        raise DegenerateQuadruple(f"nonresonant quadruple {q} has vanishing phase", quadruple=q)
    if i1.size == 0 or phi.is_zero():
        return EnergyBreakdown(0.0, 0.0, 0.0, 0.0, 0.0)
    ratio = ps / ph
    sign = params.sign_value if params.nonlinear else 0
    tau, states = backward_nodes(phi.coeffs, T, params, quad_steps)
    F_vals, n0, r1, r2 = [], [], [], []
    for k in range(tau.size):
        u = states[k, 0]
        c = cubic_array(u, N)
        tail = np.conj(u[i2]) * u[i3] * np.conj(u[i4])
        P = u[i1] * tail
        F_vals.append(_fsum_imag(ps * P))
        n0.append(-_fsum_real(ratio * P))
        r1.append(2 * sign * _fsum_imag(ratio * c[i1] * tail))
        r2.append(-2 * sign * _fsum_imag(ratio * u[i1] * np.conj(c[i2]) * u[i3] * np.conj(u[i4])))
    F_total = _simpson(F_vals, tau)
    boundary = n0[-1] - n0[0]
    rem1 = _simpson(r1, tau)
    rem2 = _simpson(r2, tau)
    resid = abs(F_total - (boundary + rem1 + rem2))
    return EnergyBreakdown(F_total, boundary, rem1, rem2, resid)


CYLINDER_FUNCTIONALS = {
    "gauss_mode1": lambda c, N: np.exp(-np.abs(c[:, N + 1]) ** 2),
    "saturated_mode0": lambda c, N: np.abs(c[:, N]) ** 2 / (1.0 + np.abs(c[:, N]) ** 2),
    "cos_cross": lambda c, N: np.cos((c[:, N] * np.conj(c[:, N + 1])).real),
}


def transport_identity_table(
    psis,
    spec: MeasureSpec,
    params: FlowParams,
    t: float,
    M: int,
    seed: int,
    workers=None,
) -> list[tuple[MCEstimate, MCEstimate, float]]:
    """Both sides of ``E[psi(Phi_t phi)] = E[psi(phi) f(t, phi)]`` for each ``psi``.

    Each ``psi(coeffs, N)`` acts on rows of coefficients and is bounded.
    Expectations are over ``spec`` (conditioned on its cutoff ball, which
    the flow preserves).  The two sides use independent child seeds and
    the norm form of the density.  Returns ``(pushforward, reweighted, z)``
    per functional.
    """
    N = spec.n_max
    if params.n_max != N:
        raise ValueError("spec and params truncations differ")
    psis = list(psis)

    def pushed(rows):
        u = integrate(rows, [t], params)[0][0] if t != 0 else rows
        return np.column_stack([psi(u, N) for psi in psis])

    def weighted(rows):
        w = np.exp(sample_log_density_array(rows, t, params, spec.s, "norm"))
        return np.column_stack([psi(rows, N) * w for psi in psis])

    s1, s2 = child_seed(seed, 1), child_seed(seed, 2)
    v1, r1 = mc_values(pushed, spec, M, s1, workers, batched=True, n_outputs=len(psis))
    v2, r2 = mc_values(weighted, spec, M, s2, workers, batched=True, n_outputs=len(psis))
    out = []
    for j in range(len(psis)):
        a = MCEstimate.from_values(v1[:, j], s1, r1)
        b = MCEstimate.from_values(v2[:, j], s2, r2)
        out.append((a, b, z_score(a, b)))
    return out


def transport_identity(psi, spec: MeasureSpec, params: FlowParams, t: float, M: int, seed: int, workers=None):
    """Single-functional form of :func:`transport_identity_table`."""
    return transport_identity_table([psi], spec, params, t, M, seed, workers)[0]
