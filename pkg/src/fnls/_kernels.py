"""Compiled inner loops for the interaction-picture integrator.

The cubic product here is the direct two-stage convolution
``P_m = sum_{n1-n2=m} u_{n1} conj(u_{n2})``, ``C_n = sum_{n3} P_{n-n3} u_{n3}``,
exact and alias-free, O(N^2) per row.  Rows of a batch share one step
sequence; the error norm is the worst row's.
"""
import numpy as np
from numba import njit

# Dormand-Prince 5(4).
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

SAFETY = 0.9
BETA1 = 0.7 / 5
BETA2 = 0.4 / 5
FAC_MIN = 0.2
FAC_MAX = 5.0


@njit(cache=True, fastmath=True, nogil=True)
def cubic_rows(u, out, P):
    R, D = u.shape
    N = (D - 1) // 2
    for r in range(R):
        # P_{-m} = conj(P_m)
        for m in range(0, 2 * N + 1):
            acc = 0j
            for j in range(-N, N - m + 1):
                acc += u[r, j + m + N] * np.conj(u[r, j + N])
            P[m + 2 * N] = acc
            P[2 * N - m] = np.conj(acc)
        for n in range(-N, N + 1):
            acc = 0j
            for n3 in range(-N, N + 1):
                acc += P[n - n3 + 2 * N] * u[r, n3 + N]
            out[r, n + N] = acc


@njit(cache=True, nogil=True)
def _stage(w, tau, omega, g, out, tmp, P):
    """out = exp(-i tau omega) * g * C(exp(i tau omega) w)."""
    R, D = w.shape
    ph = np.empty(D, dtype=np.complex128)
    for k in range(D):
        ph[k] = np.exp(1j * tau * omega[k])
        for r in range(R):
            tmp[r, k] = ph[k] * w[r, k]
    cubic_rows(tmp, out, P)
    for k in range(D):
        e = np.conj(ph[k]) * g
        for r in range(R):
            out[r, k] *= e


@njit(cache=True, nogil=True)
def integrate_rows(u0, times, omega, g, rtol, dt_max, dt_min, h0):
    """Advance rows of ``u0`` and record them at ``times``.

    ``g`` multiplies the cubic term (``-i*sign``, or 0 for free flow).
    Returns ``(out, n_steps, n_rejected, status, t_fail)``; ``status == 1``
    means the step size collapsed below ``dt_min``.
    """
    R, D = u0.shape
    K = times.shape[0]
    out = np.empty((K, R, D), dtype=np.complex128)
    u = u0.copy()
    w = np.empty_like(u)
    tmp = np.empty_like(u)
    P = np.empty(2 * D - 1, dtype=np.complex128)
    k1 = np.empty_like(u)
    k2 = np.empty_like(u)
    k3 = np.empty_like(u)
    k4 = np.empty_like(u)
    k5 = np.empty_like(u)
    k6 = np.empty_like(u)
    k7 = np.empty_like(u)
    _stage(u, 0.0, omega, g, k1, tmp, P)

    direction = 1.0
    if K > 0 and times[K - 1] < 0:
        direction = -1.0
    t = 0.0
    h = direction * h0
    err_prev = 1.0
    n_steps = 0
    n_rej = 0
    for j in range(K):
        target = times[j]
        while (target - t) * direction > 0:
            remaining = target - t
            landing = abs(h) >= abs(remaining) * (1 - 1e-12)
            ht = remaining if landing else h

            for r in range(R):
                for k in range(D):
                    w[r, k] = u[r, k] + ht * A21 * k1[r, k]
            _stage(w, C2 * ht, omega, g, k2, tmp, P)
            for r in range(R):
                for k in range(D):
                    w[r, k] = u[r, k] + ht * (A31 * k1[r, k] + A32 * k2[r, k])
            _stage(w, C3 * ht, omega, g, k3, tmp, P)
            for r in range(R):
                for k in range(D):
                    w[r, k] = u[r, k] + ht * (A41 * k1[r, k] + A42 * k2[r, k] + A43 * k3[r, k])
            _stage(w, C4 * ht, omega, g, k4, tmp, P)
            for r in range(R):
                for k in range(D):
                    w[r, k] = u[r, k] + ht * (
                        A51 * k1[r, k] + A52 * k2[r, k] + A53 * k3[r, k] + A54 * k4[r, k]
                    )
            _stage(w, C5 * ht, omega, g, k5, tmp, P)
            for r in range(R):
                for k in range(D):
                    w[r, k] = u[r, k] + ht * (
                        A61 * k1[r, k]
                        + A62 * k2[r, k]
                        + A63 * k3[r, k]
                        + A64 * k4[r, k]
                        + A65 * k5[r, k]
                    )
            _stage(w, ht, omega, g, k6, tmp, P)
            for r in range(R):
                for k in range(D):
                    w[r, k] = u[r, k] + ht * (
                        B1 * k1[r, k]
                        + B3 * k3[r, k]
                        + B4 * k4[r, k]
                        + B5 * k5[r, k]
                        + B6 * k6[r, k]
                    )
            _stage(w, ht, omega, g, k7, tmp, P)

            err = 0.0
            for r in range(R):
                num = 0.0
                n0 = 0.0
                n1 = 0.0
                for k in range(D):
                    e = ht * (
                        E1 * k1[r, k]
                        + E3 * k3[r, k]
                        + E4 * k4[r, k]
                        + E5 * k5[r, k]
                        + E6 * k6[r, k]
                        + E7 * k7[r, k]
                    )
                    num += e.real * e.real + e.imag * e.imag
                    a = u[r, k]
                    n0 += a.real * a.real + a.imag * a.imag
                    b = w[r, k]
                    n1 += b.real * b.real + b.imag * b.imag
                if num > 0.0:
                    ratio = np.sqrt(num) / (rtol * np.sqrt(max(n0, n1)))
                    if not np.isfinite(ratio):
                        ratio = np.inf
                    if ratio > err:
                        err = ratio
                elif not np.isfinite(num):
                    err = np.inf

            if err <= 1.0:
                if landing:
                    t = target
                else:
                    t = t + ht
                for k in range(D):
                    e = np.exp(1j * ht * omega[k])
                    for r in range(R):
                        u[r, k] = e * w[r, k]
                        k1[r, k] = e * k7[r, k]
                n_steps += 1
                if err == 0.0:
                    fac = FAC_MAX
                else:
                    fac = SAFETY * err ** (-BETA1) * err_prev ** BETA2
                    fac = min(FAC_MAX, max(FAC_MIN, fac))
                err_prev = max(err, 1e-4)
                h_next = ht * fac
                if landing and abs(h) > abs(h_next):
                    h_next = h
                h = direction * min(abs(h_next), dt_max)
                if abs(h) < dt_min:
                    return out, n_steps, n_rej, 1, t
            else:
                n_rej += 1
                if np.isfinite(err):
                    fac = max(FAC_MIN, SAFETY * err ** (-0.2))
                else:
                    fac = FAC_MIN
                h = ht * fac
                if abs(h) < dt_min:
                    return out, n_steps, n_rej, 1, t
        for r in range(R):
            for k in range(D):
                out[j, r, k] = u[r, k]
    return out, n_steps, n_rej, 0, t


@njit(cache=True, nogil=True)
def philox_normals(k0_init, k1_init, idx, att, blocks, out):
    """Philox4x32-10 + Box-Muller, one complex normal per (row, block)."""
    M0 = np.uint64(0xD2511F53)
    M1 = np.uint64(0xCD9E8D57)
    W0 = np.uint64(0x9E3779B9)
    W1 = np.uint64(0xBB67AE85)
    MASK = np.uint64(0xFFFFFFFF)
    S32 = np.uint64(32)
    S11 = np.uint64(11)
    scale = 1.0 / 9007199254740992.0
    for r in range(idx.shape[0]):
        for b in range(blocks.shape[0]):
            c0 = np.uint64(blocks[b]) & MASK
            c1 = np.uint64(att[r]) & MASK
            c2 = np.uint64(idx[r]) & MASK
            c3 = np.uint64(idx[r]) >> S32
            k0 = np.uint64(k0_init)
            k1 = np.uint64(k1_init)
            for rnd in range(10):
                if rnd > 0:
                    k0 = (k0 + W0) & MASK
                    k1 = (k1 + W1) & MASK
                p0 = M0 * c0
                p1 = M1 * c2
                n0 = (p1 >> S32) ^ c1 ^ k0
                n2 = (p0 >> S32) ^ c3 ^ k1
                c1 = p1 & MASK
                c3 = p0 & MASK
                c0 = n0
                c2 = n2
            u1 = np.float64(((c0 << S32) | c1) >> S11) * scale
            u2 = np.float64(((c2 << S32) | c3) >> S11) * scale
            rad = np.sqrt(-np.log1p(-u1))
            th = 2.0 * np.pi * u2
            out[r, b] = complex(rad * np.cos(th), rad * np.sin(th))
