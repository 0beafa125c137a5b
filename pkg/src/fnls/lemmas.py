"""Brute-force checks of the frequency-quadruple estimates.

Quadruples live on the plane ``n4 = n1 - n2 + n3``.  A quadruple is
resonant when ``{n1, n3} = {n2, n4}``, equivalently ``n2 in {n1, n3}``;
the phase ``Phi_alpha`` then vanishes identically.  Scans cover every
quadruple with ``n_max = max|n_i| + 1 <= scale`` and report the extremal
normalized ratio together with a witness; the same ``n_max`` enters the
normalizing powers.  Resonance is decided by the integer test, never by a
floating threshold.
"""
from __future__ import annotations

import csv
import os
from dataclasses import astuple, dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import simpson

from .errors import DegenerateQuadruple

PHASE_ZERO = 1e-12
MAX_SCALE = 256


@dataclass(frozen=True)
class Quadruple:
    n1: int
    n2: int
    n3: int
    n4: int

    def __post_init__(self):
        if self.n4 != self.n1 - self.n2 + self.n3:
            raise ValueError("quadruple must satisfy n4 = n1 - n2 + n3")

    @classmethod
    def from_three(cls, n1: int, n2: int, n3: int) -> "Quadruple":
        return cls(int(n1), int(n2), int(n3), int(n1 - n2 + n3))

    @property
    def n_max(self) -> int:
        return max(abs(self.n1), abs(self.n2), abs(self.n3), abs(self.n4)) + 1

    def is_resonant(self) -> bool:
        return self.n2 == self.n1 or self.n2 == self.n3


@dataclass(frozen=True)
class ScanReport:
    scale: int
    extremal_constant: float
    witness: Quadruple
    n_tuples: int

    CSV_HEADER = ("alpha", "s", "scale", "extremal_constant", "n1", "n2", "n3", "n4", "n_tuples")

    def csv_row(self, alpha, s) -> list:
        return [alpha, s, self.scale, repr(float(self.extremal_constant)), *astuple(self.witness), self.n_tuples]

    def append_csv(self, path, alpha, s="") -> None:
        new = not os.path.exists(path) or os.path.getsize(path) == 0
        with open(path, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(self.CSV_HEADER)
            w.writerow(self.csv_row(alpha, s))


def _power(n, alpha):
    return np.abs(np.asarray(n, dtype=float)) ** (2 * alpha)


def _bracket(n, s):
    n = np.asarray(n, dtype=float)
    return (1.0 + n * n) ** s


# Terms are paired as (1 - 4) + (3 - 2) so that both resonant families
# {n1, n3} = {n2, n4} cancel exactly in floating point.
def phase_array(n1, n2, n3, n4, alpha: float):
    return (_power(n1, alpha) - _power(n4, alpha)) + (_power(n3, alpha) - _power(n2, alpha))


def psi_array(n1, n2, n3, n4, s: float):
    return (_bracket(n1, s) - _bracket(n4, s)) + (_bracket(n3, s) - _bracket(n2, s))


def phase(q: Quadruple, alpha: float) -> float:
    """``|n1|^{2a} - |n2|^{2a} + |n3|^{2a} - |n4|^{2a}``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return float(phase_array(q.n1, q.n2, q.n3, q.n4, alpha))


def psi(q: Quadruple, s: float) -> float:
    """``<n1>^{2s} - <n2>^{2s} + <n3>^{2s} - <n4>^{2s}``."""
    return float(psi_array(q.n1, q.n2, q.n3, q.n4, s))


def nonresonant_quadruples(n_max: int) -> tuple[np.ndarray, ...]:
    """All nonresonant quadruples with every ``|n_i| <= n_max``.

    Order: ``n1``, ``n2``, ``n3`` ascending over ``[-N, N]``, ``n4`` derived.
    """
    r = np.arange(-n_max, n_max + 1)
    n1, n2, n3 = (a.ravel() for a in np.meshgrid(r, r, r, indexing="ij"))
    n4 = n1 - n2 + n3
    keep = (np.abs(n4) <= n_max) & (n2 != n1) & (n2 != n3)
    return n1[keep], n2[keep], n3[keep], n4[keep]


def count_resonant_set(n: int, tau: float, M: float, alpha: float) -> int:
    """``#{n1 : | |n1|^{2a} + |n - n1|^{2a} - tau | <= M}`` by exhaustive scan."""
    if not M >= 1:
        raise ValueError("M must be >= 1")
    if not alpha > 0.5:
        raise ValueError("alpha must exceed 0.5")
    window = int(np.floor((abs(tau) + M) ** (1.0 / (2 * alpha)) + abs(n) + 2))
    n1 = np.arange(-window, window + 1)
    g = _power(n1, alpha) + _power(n - n1, alpha)
    return int(np.count_nonzero(np.abs(g - tau) <= M))


def max_count_over_tau(n: int, M: float, alpha: float, tau_max: float) -> tuple[int, float]:
    """Largest count over real ``tau in [0, tau_max]``, with a maximizing ``tau``.

    An optimal window can be slid right until its left edge sits on a
    value (or its centre on ``tau_max``), so those candidates suffice.
    """
    window = int(np.floor((tau_max + M) ** (1.0 / (2 * alpha)) + abs(n) + 2))
    n1 = np.arange(-window, window + 1)
    v = np.sort(_power(n1, alpha) + _power(n - n1, alpha))
    centres = np.clip(v + M, 0.0, tau_max)
    centres = np.append(centres, tau_max)
    lo = np.searchsorted(v, centres - M, side="left")
    hi = np.searchsorted(v, centres + M, side="right")
    counts = hi - lo
    k = int(np.argmax(counts))
    # report the midpoint of the captured values, which sits strictly inside
    # the optimal range of tau and so survives rounding in the count
    tau = 0.5 * (v[lo[k]] + v[hi[k] - 1])
    if not 0.0 <= tau <= tau_max:
        tau = float(centres[k])
    return int(np.count_nonzero(np.abs(v - tau) <= M)), float(tau)


def counting_profile(
    alpha: float, Ms: Sequence[float], n_range=(-20, 20), tau_max: float = 1e4
) -> np.ndarray:
    """``max_{n, tau} count / M^{1/(2 alpha)}`` for each ``M``."""
    out = []
    for M in Ms:
        best = max(max_count_over_tau(n, M, alpha, tau_max)[0] for n in range(n_range[0], n_range[1] + 1))
        out.append(best / M ** (1.0 / (2 * alpha)))
    return np.array(out)


def _check_scale(scale: int) -> None:
    if not 2 <= scale <= MAX_SCALE:
        raise ValueError(f"scale must lie in [2, {MAX_SCALE}]")


def _scan(scale: int, ratio_fn, mode: str):
    """Extremum of ``ratio_fn`` over nonresonant quadruples, sliced by ``n1``.

    ``ratio_fn(n1, n2, n3, n4, nmax)`` returns the normalized ratio array.
    """
    _check_scale(scale)
    K = scale - 1
    r = np.arange(-K, K + 1)
    n2g, n3g = (a.ravel() for a in np.meshgrid(r, r, indexing="ij"))
    best = np.inf if mode == "min" else -np.inf
    witness = None
    total = 0
    for n1 in range(-K, K + 1):
        n4 = n1 - n2g + n3g
        keep = (np.abs(n4) <= K) & (n2g != n1) & (n2g != n3g)
        a2, a3, a4 = n2g[keep], n3g[keep], n4[keep]
        a1 = np.full(a2.shape, n1)
        nmax = np.maximum(np.maximum(np.abs(a1), np.abs(a2)), np.maximum(np.abs(a3), np.abs(a4))) + 1
        vals = ratio_fn(a1, a2, a3, a4, nmax)
        total += vals.size
        if vals.size == 0:
            continue
        k = int(np.argmin(vals) if mode == "min" else np.argmax(vals))
        if (mode == "min" and vals[k] < best) or (mode == "max" and vals[k] > best):
            best = float(vals[k])
            witness = Quadruple(int(a1[k]), int(a2[k]), int(a3[k]), int(a4[k]))
    return ScanReport(scale, best, witness, total)


def _degenerate(n1, n2, n3, n4, ph):
    bad = np.flatnonzero(np.abs(ph) < PHASE_ZERO)
    if bad.size:
        k = bad[0]
        q = Quadruple(int(n1[k]), int(n2[k]), int(n3[k]), int(n4[k]))
        raise DegenerateQuadruple(f"nonresonant quadruple {q} has vanishing phase", quadruple=q)


def scan_phase_lower_bound(alpha: float, scale: int) -> ScanReport:
    """``min |Phi_a| / (|n4-n1| |n4-n3| n_max^{2a-2})`` over nonresonant quadruples."""
    if not alpha > 0.5:
        raise ValueError("alpha must exceed 0.5")

    def ratio(n1, n2, n3, n4, nmax):
        ph = phase_array(n1, n2, n3, n4, alpha)
        return np.abs(ph) / (np.abs(n4 - n1) * np.abs(n4 - n3) * nmax.astype(float) ** (2 * alpha - 2))

    return _scan(scale, ratio, "min")


def scan_min_phase(alpha: float, scale: int) -> ScanReport:
    """Smallest ``|Phi_a|`` over nonresonant quadruples (no normalization)."""

    def ratio(n1, n2, n3, n4, nmax):
        return np.abs(phase_array(n1, n2, n3, n4, alpha))

    return _scan(scale, ratio, "min")


def scan_ratio_bound(alpha: float, s: float, scale: int) -> ScanReport:
    """``max |Psi_s| / |Phi_a| * n_max^{2a-2s}`` over nonresonant quadruples."""
    if not alpha > 0.5:
        raise ValueError("alpha must exceed 0.5")
    if not s >= 0.5:
        raise ValueError("s must be >= 1/2")

    def ratio(n1, n2, n3, n4, nmax):
        ph = phase_array(n1, n2, n3, n4, alpha)
        _degenerate(n1, n2, n3, n4, ph)
        ps = psi_array(n1, n2, n3, n4, s)
        return np.abs(ps) / np.abs(ph) * nmax.astype(float) ** (2 * alpha - 2 * s)

    return _scan(scale, ratio, "max")


def scan_psi_mean_value(s: float, scale: int, separation: int = 4) -> ScanReport:
    """``max |Psi_s| / (|n4-n1| n_max^{2s-1})`` where ``|n4| ~ |n1| >> min(|n2|,|n3|)``.

    The regime keeps ``|n1|, |n4|`` within a factor 2 of each other and at
    least ``separation`` times ``min(|n2|, |n3|)``.
    """
    if not s >= 0.5:
        raise ValueError("s must be >= 1/2")

    def ratio(n1, n2, n3, n4, nmax):
        a1, a4 = np.abs(n1), np.abs(n4)
        low = np.minimum(np.abs(n2), np.abs(n3))
        regime = (a1 <= 2 * a4) & (a4 <= 2 * a1) & (np.minimum(a1, a4) >= separation * np.maximum(low, 1))
        ps = psi_array(n1, n2, n3, n4, s)
        vals = np.abs(ps) / (np.abs(n4 - n1) * nmax.astype(float) ** (2 * s - 1))
        return np.where(regime, vals, -np.inf)

    return _scan(scale, ratio, "max")


def dmvt_residual(coeffs, xi: float, eta: float, lam: float, grid: int) -> float:
    """``|f(x+e+l) - f(x+e) - f(x+l) + f(x) - l e iint f''(x + t1 l + t2 e)|``.

    ``coeffs`` are polynomial coefficients in ascending degree; the double
    integral over the unit square uses composite Simpson with ``grid``
    intervals per axis.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    f = Polynomial(coeffs)
    f2 = f.deriv(2)
    lhs = f(xi + eta + lam) - f(xi + eta) - f(xi + lam) + f(xi)
    t = np.linspace(0.0, 1.0, grid + 1)
    vals = f2(xi + t[:, None] * lam + t[None, :] * eta)
    rhs = lam * eta * simpson(simpson(vals, x=t, axis=1), x=t)
    return float(abs(lhs - rhs))
