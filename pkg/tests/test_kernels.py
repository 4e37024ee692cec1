import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.linalg import expm

from nhskin import _kernels


def blocks(rng, nb, n, scale=1.0):
    c = lambda *s: rng.normal(size=s) + 1j * rng.normal(size=s)  # noqa: E731
    D = c(nb, n, 2, 2) * scale + 3 * np.eye(2)
    return D, c(nb, n - 1, 2, 2), c(nb, n - 1, 2, 2)


@pytest.mark.parametrize("n", [1, 2, 5, 17])
def test_corner_greens_against_dense(rng, n):
    D, U, L = blocks(rng, 8, n)
    ref_n1, ref_1n, _ = _kernels.corner_greens_dense(D, U, L)
    inv = np.linalg.inv(_kernels.dense_from_blocks(D, U, L))
    assert np.allclose(ref_n1, inv[:, -2:, :2], rtol=1e-12, atol=1e-14)
    for impl in (_kernels.corner_greens_numba, _kernels.corner_greens_numpy):
        g_n1, g_1n, pivot = impl(D, U, L)
        scale = np.abs(ref_n1).max()
        assert np.abs(g_n1 - ref_n1).max() <= 1e-10 * scale
        assert np.abs(g_1n - ref_1n).max() <= 1e-10 * np.abs(ref_1n).max()
        assert np.all(pivot > 0)


def test_corner_greens_backends_agree(rng):
    D, U, L = blocks(rng, 50, 9)
    a = _kernels.corner_greens_numba(D, U, L)
    b = _kernels.corner_greens_numpy(D, U, L)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-13, atol=0)


def test_singular_pivot_flagged(rng):
    D, U, L = blocks(rng, 3, 4)
    D[1, 0] = 0.0
    for impl in (_kernels.corner_greens_numba, _kernels.corner_greens_numpy):
        g_n1, _, pivot = impl(D, U, L)
        assert pivot[1] == 0.0
        assert np.all(pivot[[0, 2]] > 0)
        assert np.all(np.isfinite(g_n1[[0, 2]]))


def test_phase_grid_exhaustive(rng):
    B = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = 32
    ph = 2 * np.pi * np.arange(m) / m
    vals = [abs(B[0, 0] + B[0, 1] * np.exp(1j * p) + (B[1, 0] + B[1, 1] * np.exp(1j * p)) * np.exp(1j * q)) ** 2 / 4
            for p in ph for q in ph]
    for impl in (_kernels.phase_grid_max_numba, _kernels.phase_grid_max_numpy):
        best, phi, theta = impl(B, m)
        assert best == pytest.approx(max(vals), rel=1e-13)


@pytest.mark.parametrize("impl", [_kernels.dopri5_numba, _kernels.dopri5_numpy])
def test_dopri5_against_expm(rng, impl):
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    A = A + A.conj().T - 0.3j * np.eye(6)
    psi0 = np.zeros(6, complex)
    psi0[0] = 1
    times = np.linspace(0, 5, 11)
    out, steps, _, status = impl(A, psi0, times, 1e-11)
    ref = np.stack([expm(-1j * A * t) @ psi0 for t in times])
    assert status == _kernels.OK and steps > 0
    assert np.abs(out - ref).max() <= 1e-8


def test_dopri5_backends_agree(rng):
    A = rng.normal(size=(4, 4)) + 0j
    psi0 = np.ones(4, complex) / 2
    times = np.linspace(0, 3, 7)
    a = _kernels.dopri5_numba(A, psi0, times, 1e-10)
    b = _kernels.dopri5_numpy(A, psi0, times, 1e-10)
    assert a[1:] == b[1:]
    assert np.allclose(a[0], b[0], rtol=1e-12, atol=1e-14)


def test_dopri5_tolerance_controls_error():
    # scalar decay: tightening the tolerance shrinks the global error
    A = np.array([[-0.5j]])
    errs = []
    for tol in (1e-6, 1e-9):
        out, *_ = _kernels.dopri5_numpy(A, np.array([1.0 + 0j]), np.array([0.0, 2.0]), tol)
        errs.append(abs(out[-1, 0] - np.exp(-1.0)))
    assert errs[1] < errs[0] and errs[1] <= 1e-9


def test_backend_default():
    assert _kernels.BACKEND == ("numba" if _kernels.USE_NUMBA else "numpy")


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("0", "numba"), ("", "numba")])
def test_env_flag_selects_backend(flag, expected):
    if not _kernels.HAVE_NUMBA and expected == "numba":
        pytest.skip("numba not installed")
    env = dict(os.environ, NHSKIN_NO_NUMBA=flag)
    code = "from nhskin import _kernels as k; print(k.BACKEND, k.corner_greens.__name__)"
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, name = res.stdout.split()
    assert backend == expected and name.endswith(expected)
