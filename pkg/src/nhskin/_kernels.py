"""Hot numeric kernels.

Each kernel has a numba implementation and a pure-numpy one with the same
signature.  The module-level names (``corner_greens``, ``phase_grid_max``,
``dopri5``) point at the numba versions unless numba is missing or the
environment variable ``NHSKIN_NO_NUMBA`` is set to a non-empty value other
than ``0``.  Both variants stay importable so tests and the benchmark can
compare them in one process.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _numba_disabled() -> bool:
    flag = os.environ.get("NHSKIN_NO_NUMBA", "")
    return flag not in ("", "0")


USE_NUMBA = HAVE_NUMBA and not _numba_disabled()


def _njit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


# ---------------------------------------------------------------------------
# block-tridiagonal corner Green's functions
# ---------------------------------------------------------------------------


# 2x2 blocks travel as (m00, m01, m10, m11) tuples so the sweep never allocates


def _inv2(m00, m01, m10, m11):
    det = m00 * m11 - m01 * m10
    if det == 0:
        # singular pivot: poison the sweep, the caller's pivot gate reroutes it
        nan = complex(np.nan, np.nan)
        return (nan, nan, nan, nan), det
    return (m11 / det, -m01 / det, -m10 / det, m00 / det), det


def _mm2(a, b):
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def _pivot2(m, det):
    scale = max(abs(m[0]), abs(m[1]), abs(m[2]), abs(m[3])) ** 2
    return abs(det) / scale if scale > 0 else 0.0


def _blk(A, b, j):
    return (A[b, j, 0, 0], A[b, j, 0, 1], A[b, j, 1, 0], A[b, j, 1, 1])


def _store(out, b, m, sign):
    out[b, 0, 0] = sign * m[0]
    out[b, 0, 1] = sign * m[1]
    out[b, 1, 0] = sign * m[2]
    out[b, 1, 1] = sign * m[3]


_inv2 = _njit(_inv2)
_mm2 = _njit(_mm2)
_pivot2 = _njit(_pivot2)
_blk = _njit(_blk)
_store = _njit(_store)


@_njit
def _corner_greens_impl(D, U, L):
    nb, n = D.shape[0], D.shape[1]
    g_n1 = np.empty((nb, 2, 2), dtype=np.complex128)
    g_1n = np.empty((nb, 2, 2), dtype=np.complex128)
    pivot = np.empty(nb, dtype=np.float64)
    for b in range(nb):
        d = _blk(D, b, 0)
        minv, det = _inv2(d[0], d[1], d[2], d[3])
        worst = _pivot2(d, det)
        r = minv
        prod = (1.0 + 0j, 0j, 0j, 1.0 + 0j)
        for j in range(1, n):
            lo = _blk(L, b, j - 1)
            cp = _mm2(minv, _blk(U, b, j - 1))
            prod = _mm2(prod, cp)
            lc = _mm2(lo, cp)
            d = _blk(D, b, j)
            m = (d[0] - lc[0], d[1] - lc[1], d[2] - lc[2], d[3] - lc[3])
            minv, det = _inv2(m[0], m[1], m[2], m[3])
            ratio = _pivot2(m, det)
            if ratio < worst:
                worst = ratio
            r = _mm2(minv, _mm2(lo, r))
            r = (-r[0], -r[1], -r[2], -r[3])
        _store(g_n1, b, r, 1.0)
        # back substitution with a last-block right-hand side collapses to a product
        _store(g_1n, b, _mm2(prod, minv), 1.0 if (n - 1) % 2 == 0 else -1.0)
        pivot[b] = worst
    return g_n1, g_1n, pivot


def corner_greens_numba(D, U, L):
    """Corner blocks of ``A^{-1}`` for a batch of block-tridiagonal matrices.

    Parameters
    ----------
    D : (B, n, 2, 2) complex
        Diagonal blocks ``A[j, j]``.
    U, L : (B, n-1, 2, 2) complex
        Super-diagonal ``A[j, j+1]`` and sub-diagonal ``A[j+1, j]`` blocks.

    Returns
    -------
    g_n1, g_1n : (B, 2, 2) complex
        ``A^{-1}[n, 1]`` and ``A^{-1}[1, n]`` blocks.
    pivot : (B,) float
        Smallest normalized 2x2 pivot determinant met during elimination.
        Values near zero mean the unpivoted sweep is untrustworthy.
    """
    D, U, L = _as_blocks(D, U, L)
    return _corner_greens_impl(D, U, L)


def _inv2_batch(m):
    det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    out = np.full_like(m, np.nan)
    ok = np.isfinite(det) & (det != 0)
    d = det[ok]
    out[ok, 0, 0] = m[ok, 1, 1] / d
    out[ok, 0, 1] = -m[ok, 0, 1] / d
    out[ok, 1, 0] = -m[ok, 1, 0] / d
    out[ok, 1, 1] = m[ok, 0, 0] / d
    return out, det


def _pivot_ratio(m, det):
    scale = np.abs(m).reshape(m.shape[0], 4).max(axis=1) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(scale > 0, np.abs(det) / scale, 0.0)


def corner_greens_numpy(D, U, L):
    """Same elimination as :func:`corner_greens_numba`, vectorized over the batch."""
    D, U, L = _as_blocks(D, U, L)
    n = D.shape[1]
    minv, det = _inv2_batch(D[:, 0])
    worst = _pivot_ratio(D[:, 0], det)
    r = minv.copy()
    prod = np.broadcast_to(np.eye(2, dtype=np.complex128), minv.shape).copy()
    for j in range(1, n):
        cp = minv @ U[:, j - 1]
        prod = prod @ cp
        m = D[:, j] - L[:, j - 1] @ cp
        minv, det = _inv2_batch(m)
        worst = np.fmin(worst, _pivot_ratio(m, det))
        r = -(minv @ (L[:, j - 1] @ r))
    sign = 1.0 if (n - 1) % 2 == 0 else -1.0
    return r, sign * (prod @ minv), worst


def corner_greens_dense(D, U, L):
    """Reference corner blocks from a dense LU solve (independent of the sweep)."""
    D, U, L = _as_blocks(D, U, L)
    nb, n = D.shape[0], D.shape[1]
    A = dense_from_blocks(D, U, L)
    rhs = np.zeros((nb, 2 * n, 4), dtype=np.complex128)
    rhs[:, 0, 0] = 1.0
    rhs[:, 1, 1] = 1.0
    rhs[:, 2 * n - 2, 2] = 1.0
    rhs[:, 2 * n - 1, 3] = 1.0
    x = np.linalg.solve(A, rhs)
    g_n1 = x[:, 2 * n - 2 :, 0:2]
    g_1n = x[:, 0:2, 2:4]
    return np.ascontiguousarray(g_n1), np.ascontiguousarray(g_1n), np.ones(nb)


def dense_from_blocks(D, U, L):
    nb, n = D.shape[0], D.shape[1]
    A = np.zeros((nb, 2 * n, 2 * n), dtype=np.complex128)
    for j in range(n):
        A[:, 2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = D[:, j]
    for j in range(n - 1):
        A[:, 2 * j : 2 * j + 2, 2 * j + 2 : 2 * j + 4] = U[:, j]
        A[:, 2 * j + 2 : 2 * j + 4, 2 * j : 2 * j + 2] = L[:, j]
    return A


def _as_blocks(D, U, L):
    D = np.ascontiguousarray(D, dtype=np.complex128)
    n = D.shape[1]
    U = np.ascontiguousarray(U, dtype=np.complex128).reshape(D.shape[0], max(n - 1, 0), 2, 2)
    L = np.ascontiguousarray(L, dtype=np.complex128).reshape(D.shape[0], max(n - 1, 0), 2, 2)
    return D, U, L


# ---------------------------------------------------------------------------
# two-port phase grid: max over (phi, theta) of |(1, e^{i theta}) B (1, e^{i phi})|^2 / 4
# ---------------------------------------------------------------------------


@_njit
def _phase_grid_nb_impl(B, m):
    best = -1.0
    bi = 0
    bj = 0
    step = 2.0 * np.pi / m
    e = np.exp(1j * step * np.arange(m))
    for i in range(m):
        x = B[0, 0] + B[0, 1] * e[i]
        y = B[1, 0] + B[1, 1] * e[i]
        for j in range(m):
            z = x + y * e[j]
            val = (z.real * z.real + z.imag * z.imag) / 4.0
            if val > best:
                best = val
                bi = i
                bj = j
    return best, step * bi, step * bj


def phase_grid_max_numba(B, m):
    """Best (value, phi, theta) on an ``m x m`` uniform phase grid."""
    B = np.ascontiguousarray(B, dtype=np.complex128)
    return _phase_grid_nb_impl(B, int(m))


def phase_grid_max_numpy(B, m):
    B = np.asarray(B, dtype=np.complex128)
    ph = 2.0 * np.pi * np.arange(m) / m
    e = np.exp(1j * ph)
    x = B[0, 0] + B[0, 1] * e  # indexed by phi
    y = B[1, 0] + B[1, 1] * e
    vals = np.abs(x[:, None] + y[:, None] * e[None, :]) ** 2 / 4.0
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    return float(vals[i, j]), float(ph[i]), float(ph[j])


# ---------------------------------------------------------------------------
# adaptive Dormand-Prince 5(4) for d psi/dt = -i A psi
# ---------------------------------------------------------------------------

_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
        [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

# status codes returned by dopri5
OK, STEP_UNDERFLOW, MAX_STEPS = 0, 1, 2


def _dopri5_py(M, psi0, times, tol, max_steps, a_tab, e_tab):
    # M = -i A; FSAL: stage 7 is evaluated at the accepted solution
    dim = psi0.shape[0]
    out = np.empty((times.shape[0], dim), dtype=np.complex128)
    out[0] = psi0
    psi = psi0.copy()
    t = times[0]
    norm_m = np.abs(M).sum(axis=1).max()
    h = 0.01 / norm_m if norm_m > 0 else times[-1] - times[0]
    k = np.empty((7, dim), dtype=np.complex128)
    k[0] = M @ psi
    steps = 0
    rejected = 0
    for idx in range(1, times.shape[0]):
        t_target = times[idx]
        while t < t_target:
            if steps >= max_steps:
                return out, steps, rejected, MAX_STEPS
            last = False
            if t + h >= t_target:
                h_use = t_target - t
                last = True
            else:
                h_use = h
            if h_use < 1e-14 * max(1.0, abs(t)):
                if last:
                    t = t_target
                    break
                return out, steps, rejected, STEP_UNDERFLOW
            for s in range(1, 7):
                acc = psi.copy()
                for r in range(s):
                    if a_tab[s, r] != 0.0:
                        acc += h_use * a_tab[s, r] * k[r]
                k[s] = M @ acc
            # 7th stage node equals the 5th-order solution
            new = psi.copy()
            for r in range(6):
                if a_tab[6, r] != 0.0:
                    new += h_use * a_tab[6, r] * k[r]
            err_vec = np.zeros(dim, dtype=np.complex128)
            for r in range(7):
                if e_tab[r] != 0.0:
                    err_vec += h_use * e_tab[r] * k[r]
            scale = tol + tol * np.maximum(np.abs(psi), np.abs(new))
            err = np.abs(err_vec / scale).max()
            steps += 1
            if err <= 1.0:
                t = t_target if last else t + h_use
                psi = new
                k[0] = k[6]
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                if not last:
                    h = h_use * fac
            else:
                rejected += 1
                h = h_use * max(0.2, 0.9 * err ** -0.2)
        out[idx] = psi
    return out, steps, rejected, OK


_dopri5_nb_impl = _njit(_dopri5_py)


def dopri5_numba(A, psi0, times, tol=1e-10, max_steps=10_000_000):
    """Integrate ``i d psi/dt = A psi`` and sample at ``times``.

    Returns ``(psi_t, n_steps, n_rejected, status)``; ``status`` is one of
    ``OK``, ``STEP_UNDERFLOW`` or ``MAX_STEPS``.
    """
    M = np.ascontiguousarray(-1j * np.asarray(A, dtype=np.complex128))
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    times = np.ascontiguousarray(times, dtype=np.float64)
    return _dopri5_nb_impl(M, psi0, times, float(tol), int(max_steps), _A, _E)


def dopri5_numpy(A, psi0, times, tol=1e-10, max_steps=10_000_000):
    M = -1j * np.asarray(A, dtype=np.complex128)
    psi0 = np.asarray(psi0, dtype=np.complex128)
    times = np.asarray(times, dtype=np.float64)
    return _dopri5_py(M, psi0, times, float(tol), int(max_steps), _A, _E)


if USE_NUMBA:
    corner_greens = corner_greens_numba
    phase_grid_max = phase_grid_max_numba
    dopri5 = dopri5_numba
else:
    corner_greens = corner_greens_numpy
    phase_grid_max = phase_grid_max_numpy
    dopri5 = dopri5_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
