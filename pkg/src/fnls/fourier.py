"""Fourier algebra on the torus for coefficient vectors indexed by |n| <= N.

All norms and pairings live in sequence space (no factors of 2*pi):
``<f, g> = sum_n f_n conj(g_n)`` and ``||f||_{H^s}^2 = sum_n <n>^{2s} |f_n|^2``
with the Japanese bracket ``<n> = (1 + n^2)^{1/2}``.

The array-level helpers (``*_array``) act on the last axis, so a batch of
states of shape ``(..., 2N+1)`` is handled in one call.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np


def frequencies(n_max: int) -> np.ndarray:
    """Integer frequencies ``-N..N`` in storage order."""
    return np.arange(-n_max, n_max + 1)


def bracket_power(n, p: float) -> np.ndarray:
    """``<n>^p`` evaluated as ``(1 + n^2)^(p/2)``.

    Going through ``1 + n^2`` keeps ``<n>^2`` exact for integer ``n``.
    """
    n = np.asarray(n, dtype=float)
    return (1.0 + n * n) ** (0.5 * p)


def n_max_of(length: int) -> int:
    if length % 2 != 1:
        raise ValueError(f"coefficient array length must be odd, got {length}")
    return (length - 1) // 2


@dataclass(frozen=True, eq=False)
class FourierState:
    """Complex Fourier coefficients of ``sum_{|n|<=N} c_n e^{inx}``.

    ``coeffs[k]`` is the coefficient of frequency ``n = k - N``.
    """

    n_max: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if c.shape != (2 * self.n_max + 1,):
            raise ValueError(
                f"expected {2 * self.n_max + 1} coefficients, got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, n_max: int) -> "FourierState":
        return cls(n_max, np.zeros(2 * n_max + 1, dtype=np.complex128))

    @classmethod
    def from_modes(cls, n_max: int, modes: Mapping[int, complex]) -> "FourierState":
        c = np.zeros(2 * n_max + 1, dtype=np.complex128)
        for n, value in modes.items():
            if abs(n) > n_max:
                raise ValueError(f"mode {n} outside |n| <= {n_max}")
            c[n + n_max] = value
        return cls(n_max, c)

    @classmethod
    def from_array(cls, coeffs) -> "FourierState":
        coeffs = np.asarray(coeffs)
        return cls(n_max_of(coeffs.shape[-1]), coeffs)

    @property
    def n(self) -> np.ndarray:
        return frequencies(self.n_max)

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0j
        return complex(self.coeffs[n + self.n_max])

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def to_dict(self) -> dict:
        return {
            "n_max": int(self.n_max),
            "re": self.coeffs.real.tolist(),
            "im": self.coeffs.imag.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> "FourierState":
        n_max = int(data["n_max"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        if re.shape != im.shape:
            raise ValueError("re and im arrays differ in length")
        return cls(n_max, re + 1j * im)

    @classmethod
    def from_json(cls, text: str) -> "FourierState":
        return cls.from_dict(json.loads(text))


def project(state: FourierState, M: int) -> FourierState:
    """Sharp Dirichlet projection onto ``|n| <= M``.

    The result is stored on ``min(M, N)`` modes.
    """
    if M < 0:
        raise ValueError("projection radius must be >= 0")
    if M >= state.n_max:
        return state
    N = state.n_max
    return FourierState(M, state.coeffs[N - M : N + M + 1])


def embed(state: FourierState, n_max: int) -> FourierState:
    """Zero-extend ``state`` to a larger truncation ``n_max``."""
    if n_max < state.n_max:
        raise ValueError("embed only enlarges the truncation; use project")
    pad = n_max - state.n_max
    return FourierState(n_max, np.pad(state.coeffs, (pad, pad)))


def sobolev_norm_array(coeffs: np.ndarray, s: float) -> np.ndarray:
    N = n_max_of(coeffs.shape[-1])
    w = bracket_power(frequencies(N), 2 * s)
    return np.sqrt(np.sum(w * (coeffs.real**2 + coeffs.imag**2), axis=-1))


def sobolev_norm(state: FourierState, s: float) -> float:
    """``(sum_n <n>^{2s} |c_n|^2)^{1/2}``; ``s = 0`` is the L2 norm."""
    return float(sobolev_norm_array(state.coeffs, s))


def bracket_multiplier(state: FourierState, p: float) -> FourierState:
    """Apply the Fourier multiplier ``<n>^p``."""
    return FourierState(state.n_max, state.coeffs * bracket_power(state.n, p))


def l2_pairing(f: FourierState, g: FourierState) -> complex:
    if f.n_max != g.n_max:
        raise ValueError("pairing requires equal truncations")
    return complex(np.sum(f.coeffs * np.conj(g.coeffs)))


def _fft_length(min_length: int) -> int:
    return 1 << max(int(min_length - 1).bit_length(), 1)


def cubic_array(coeffs: np.ndarray, out_n_max: int | None = None) -> np.ndarray:
    """Alias-free ``(|u|^2 u)^(n) = sum_{n1-n2+n3=n} u1 conj(u2) u3``.

    Returns modes ``|n| <= out_n_max`` (default ``3N``, the full support).

    Storage index ``k = n + N`` is a frequency shift by ``N``; the cubic
    product of the shifted field is the shifted product, occupying
    ``k in [-2N, 4N]``.  A grid of ``L >= 3N + out_n_max + 1`` points keeps
    every wrapped-around mode out of the requested window.
    """
    N = n_max_of(coeffs.shape[-1])
    K = 3 * N if out_n_max is None else out_n_max
    L = _fft_length(3 * N + K + 1)
    u = np.fft.ifft(coeffs, n=L, axis=-1, norm="forward")
    c = np.fft.fft((u.real**2 + u.imag**2) * u, axis=-1, norm="forward")
    lo = N - K
    if lo >= 0:
        return c[..., lo : N + K + 1]
    return np.concatenate([c[..., L + lo :], c[..., : N + K + 1]], axis=-1)


def cubic_convolution(state: FourierState) -> FourierState:
    """Exact cubic product on the extended support ``|n| <= 3N``.

    Callers project back with :func:`project` when they need ``pi_N``.
    """
    return FourierState(3 * state.n_max, cubic_array(state.coeffs))
