"""Gaussian measures on truncated Fourier series and Monte Carlo over them.

A draw from ``mu_{s,N}`` is ``phi_n = g_n <n>^{-s}`` for ``|n| <= N`` with
independent standard complex Gaussians ``g_n`` (``E|g_n|^2 = 1``, ``n = 0``
included).  With a cutoff ``r`` the conditional law on ``||phi||_{L2} <= r``
is drawn by rejection.

Monte Carlo runs over fixed chunks of sample indices.  Every sample owns a
slot in a preallocated array and the reduction runs over that array, so a
result depends only on ``(seed, M, spec, chunk_size)`` and never on the
number of workers.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CutoffStarvation, OverflowGuard
from .fourier import FourierState, bracket_power, frequencies, sobolev_norm_array
from .rng import RandomStream, complex_normals, mode_blocks

MAX_REJECTIONS = 10**6
CHUNK_SIZE = 4096
EXP_LIMIT = 700.0


@dataclass(frozen=True)
class MeasureSpec:
    s: float
    n_max: int
    cutoff_r: Optional[float] = None

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if not np.isfinite(self.s):
            raise ValueError("s must be finite")
        if self.cutoff_r is not None and not self.cutoff_r > 0:
            raise ValueError("cutoff_r must be positive")

    def weights(self) -> np.ndarray:
        """Standard deviations ``<n>^{-s}`` of the modes."""
        return bracket_power(frequencies(self.n_max), -self.s)

    def without_cutoff(self) -> "MeasureSpec":
        return MeasureSpec(self.s, self.n_max)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int
    n_rejected: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not self.stderr >= 0:
            raise ValueError("stderr must be nonnegative")

    @classmethod
    def from_values(cls, values, seed: int, n_rejected: int = 0) -> "MCEstimate":
        v = np.asarray(values, dtype=float)
        stderr = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
        return cls(float(np.mean(v)), stderr, int(v.size), int(seed), int(n_rejected))

    def z_against(self, other: "MCEstimate") -> float:
        """Difference in combined standard errors."""
        return z_score(self, other)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MCEstimate":
        return cls(**json.loads(text))


def z_score(a: MCEstimate, b: MCEstimate) -> float:
    diff = abs(a.mean - b.mean)
    se = np.hypot(a.stderr, b.stderr)
    if se == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return float(diff / se)


def sample(spec: MeasureSpec, stream: RandomStream) -> FourierState:
    """One draw from ``mu_{s,N}`` (conditioned on the cutoff ball if set).

    Rejected attempts are counted on ``stream.n_rejected``.
    """
    w = spec.weights()
    rejected = 0
    while True:
        coeffs = stream.draw(spec.n_max) * w
        if spec.cutoff_r is None or sobolev_norm_array(coeffs, 0.0) <= spec.cutoff_r:
            break
        rejected += 1
        if rejected >= MAX_REJECTIONS:
            raise CutoffStarvation(
                f"{MAX_REJECTIONS} consecutive rejections at r={spec.cutoff_r} "
                f"(s={spec.s}, N={spec.n_max})"
            )
    stream.n_rejected += rejected
    return FourierState(spec.n_max, coeffs)


def sample_batch(spec: MeasureSpec, seed: int, indices) -> tuple[np.ndarray, int]:
    """Draws for the given sample indices, shape ``(len(indices), 2N+1)``.

    Row ``i`` equals ``sample(spec, RandomStream(seed, indices[i]))``.
    Returns ``(coeffs, n_rejected)``.
    """
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    w = spec.weights()
    blocks = mode_blocks(spec.n_max)
    coeffs = complex_normals(seed, idx, 0, blocks) * w
    if spec.cutoff_r is None:
        return coeffs, 0
    pending = np.flatnonzero(sobolev_norm_array(coeffs, 0.0) > spec.cutoff_r)
    attempt = 0
    n_rejected = 0
    while pending.size:
        n_rejected += pending.size
        attempt += 1
        if attempt >= MAX_REJECTIONS:
            raise CutoffStarvation(
                f"{MAX_REJECTIONS} consecutive rejections at r={spec.cutoff_r} "
                f"(s={spec.s}, N={spec.n_max})"
            )
        fresh = complex_normals(seed, idx[pending], attempt, blocks) * w
        ok = sobolev_norm_array(fresh, 0.0) <= spec.cutoff_r
        coeffs[pending[ok]] = fresh[ok]
        pending = pending[~ok]
    return coeffs, n_rejected


def default_workers() -> int:
    env = os.environ.get("FNLS_WORKERS")
    return max(1, int(env)) if env else 1


def chunk_bounds(M: int, chunk_size: int = CHUNK_SIZE) -> list[tuple[int, int]]:
    return [(a, min(a + chunk_size, M)) for a in range(0, M, chunk_size)]


def map_chunks(fn: Callable[[int, int], None], M: int, workers=None, chunk_size: int = CHUNK_SIZE):
    """Run ``fn(start, stop)`` over fixed chunks of ``range(M)``."""
    workers = default_workers() if workers is None else max(1, int(workers))
    bounds = chunk_bounds(M, chunk_size)
    if workers == 1 or len(bounds) == 1:
        for a, b in bounds:
            fn(a, b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for fut in [pool.submit(fn, a, b) for a, b in bounds]:
            fut.result()


def _attach_index(err: Exception, index: int) -> Exception:
    err.sample_index = int(index)
    if err.args and isinstance(err.args[0], str) and "sample " not in err.args[0]:
        err.args = (f"{err.args[0]} [sample {index}]",) + err.args[1:]
    return err


def evaluate_batch(fn, coeffs: np.ndarray, start: int) -> np.ndarray:
    """Apply a batched functional; on failure, locate the failing sample."""
    try:
        return np.asarray(fn(coeffs), dtype=float)
    except Exception:
        pass
    rows = []
    for i in range(coeffs.shape[0]):
        try:
            rows.append(np.asarray(fn(coeffs[i : i + 1]), dtype=float)[0])
        except Exception as err:  # noqa: PERF203
            raise _attach_index(err, start + i)
    return np.array(rows)


def mc_values(
    F: Callable,
    spec: MeasureSpec,
    M: int,
    seed: int,
    workers=None,
    batched: bool = False,
    chunk_size: int = CHUNK_SIZE,
    n_outputs: Optional[int] = None,
) -> tuple[np.ndarray, int]:
    """Per-sample values of ``F`` and the total rejection count.

    ``F`` maps a :class:`FourierState` to a float, or with ``batched=True``
    an array ``(m, 2N+1)`` of coefficients to ``m`` floats.  A batched
    ``F`` may return ``(m, n_outputs)`` to evaluate several functionals on
    the same draws.
    """
    values = np.empty((M,) if n_outputs is None else (M, n_outputs))
    rejected = np.zeros(len(chunk_bounds(M, chunk_size)), dtype=np.int64)

    def work(a, b):
        coeffs, nrej = sample_batch(spec, seed, np.arange(a, b))
        rejected[a // chunk_size] = nrej
        if batched:
            values[a:b] = evaluate_batch(F, coeffs, a)
            return
        for i in range(b - a):
            try:
                values[a + i] = float(F(FourierState(spec.n_max, coeffs[i])))
            except Exception as err:
                raise _attach_index(err, a + i)

    map_chunks(work, M, workers, chunk_size)
    return values, int(rejected.sum())


def mc_expectation(
    F: Callable,
    spec: MeasureSpec,
    M: int,
    seed: int,
    workers=None,
    batched: bool = False,
    chunk_size: int = CHUNK_SIZE,
) -> MCEstimate:
    """Sample mean of ``F`` over ``M`` draws, with standard error."""
    if M < 2:
        raise ValueError("M must be >= 2")
    values, nrej = mc_values(F, spec, M, seed, workers, batched, chunk_size)
    return MCEstimate.from_values(values, seed, nrej)


def partition_estimate(
    spec: MeasureSpec,
    q: float,
    sigma: float,
    M: int,
    seed: int,
    workers=None,
    chunk_size: int = CHUNK_SIZE,
) -> MCEstimate:
    """``E[1{||phi||_{L2} <= r} exp((||D^sigma phi||_{L2}^2)^q)]`` under ``mu_{s,N}``.

    The indicator enters as a 0/1 weight on unconditioned draws.  If any
    sample inside the ball has exponent above 700 it is clipped there and
    :class:`OverflowGuard` is raised carrying the clipped estimate.
    """
    if spec.cutoff_r is None:
        raise ValueError("partition_estimate needs spec.cutoff_r")
    if not q >= 1:
        raise ValueError("q must be >= 1")
    if not sigma * q < spec.s:
        raise ValueError("need sigma * q < s")
    if M < 2:
        raise ValueError("M must be >= 2")
    r = spec.cutoff_r
    saturated = np.zeros(len(chunk_bounds(M, chunk_size)), dtype=np.int64)

    def weight(coeffs):
        inside = sobolev_norm_array(coeffs, 0.0) <= r
        expo = np.where(inside, sobolev_norm_array(coeffs, sigma) ** (2 * q), 0.0)
        return inside, expo

    values = np.empty(M)
    base = spec.without_cutoff()

    def work(a, b):
        coeffs, _ = sample_batch(base, seed, np.arange(a, b))
        inside, expo = weight(coeffs)
        over = expo > EXP_LIMIT
        saturated[a // chunk_size] = int(over.sum())
        values[a:b] = np.where(inside, np.exp(np.minimum(expo, EXP_LIMIT)), 0.0)

    map_chunks(work, M, workers, chunk_size)
    est = MCEstimate.from_values(values, seed, 0)
    n_sat = int(saturated.sum())
    if n_sat:
        raise OverflowGuard(
            f"{n_sat} samples had exponent above {EXP_LIMIT:g}", estimate=est, n_saturated=n_sat
        )
    return est
