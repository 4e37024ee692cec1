"""Steady-state scattering between the end units of the chain.

The matrix inverted is ``H + i v I + M_gamma``: the chain Hamiltonian, the
uniform on-site loss that accompanies the dissipative coupling, and the port
damping on units 1 and n.  Ports are both modes of unit 1 (input for forward
transmission) and both modes of unit n.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .dynamics import dynamical_matrix
from .errors import IllConditionedError
from .model import Boundary, ChainParams

FWD = "FWD"
BWD = "BWD"
PHASE_GRID = 256
COND_LIMIT = 1e12


def port_rates(n: int, gamma: float) -> np.ndarray:
    g = np.zeros(2 * n)
    g[[0, 1, 2 * n - 2, 2 * n - 1]] = gamma
    return g


def _check_ports(params: ChainParams) -> None:
    if params.n < 2:
        raise ValueError("scattering needs n >= 2 so the two port units differ")
    if params.gamma <= 0:
        raise ValueError("scattering needs gamma > 0")
    if params.bc is not Boundary.OBC:
        raise ValueError("ports sit on the chain ends; use bc=OBC")


def driven_matrix(params: ChainParams) -> np.ndarray:
    """``H + i v I + M_gamma`` with a conditioning check."""
    _check_ports(params)
    a = dynamical_matrix(params, include_ports=True)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise IllConditionedError(f"H + M_gamma is ill-conditioned (cond = {cond:.3e})")
    return a


def scattering_matrix(params: ChainParams) -> np.ndarray:
    """``S_ij = i sqrt(gamma_i gamma_j) (H + i v I + M_gamma)^{-1}_ij`` at resonance."""
    a = driven_matrix(params)
    g = port_rates(params.n, params.gamma)
    return 1j * np.sqrt(np.outer(g, g)) * np.linalg.inv(a)


def _ports(n: int, direction: str):
    first, last = np.array([0, 1]), np.array([2 * n - 2, 2 * n - 1])
    if direction == FWD:
        return first, last
    if direction == BWD:
        return last, first
    raise ValueError(f"direction must be FWD or BWD, got {direction!r}")


def closed_form(s: np.ndarray, direction: str) -> float:
    """``4|S_{2n,1}|^2`` (FWD) or ``4|S_{1,2n}|^2`` (BWD)."""
    dim = s.shape[0]
    if direction == FWD:
        return float(4 * abs(s[dim - 1, 0]) ** 2)
    if direction == BWD:
        return float(4 * abs(s[0, dim - 1]) ** 2)
    raise ValueError(f"direction must be FWD or BWD, got {direction!r}")


def two_port_block(params: ChainParams, direction: str) -> np.ndarray:
    """Output-by-input amplitude block from explicit drives of the two input modes.

    Each input mode is driven with unit amplitude through its port coupling
    and the output unit's fields ``i sqrt(gamma) psi`` are read off.
    """
    a = driven_matrix(params)
    inp, out = _ports(params.n, direction)
    drive = np.zeros((params.dim, 2), dtype=complex)
    drive[inp, [0, 1]] = np.sqrt(params.gamma)
    psi = np.linalg.solve(a, drive)
    return 1j * np.sqrt(params.gamma) * psi[out]


def _power(block, phi, theta):
    z = block[0, 0] + block[0, 1] * np.exp(1j * phi)
    z = z + (block[1, 0] + block[1, 1] * np.exp(1j * phi)) * np.exp(1j * theta)
    return abs(z) ** 2 / 4


def optimize_phases(block: np.ndarray, grid: int = PHASE_GRID, sweeps: int = 20):
    """Maximize ``P_out/P_in`` over input phase ``phi`` and output phase ``theta``.

    Inputs ``(1, e^{i phi})/sqrt(2)``, output ``|a + b e^{i theta}|^2 / 2``.
    A ``grid x grid`` scan is refined by alternating bounded Brent searches.
    Returns ``(value, phi, theta)``.
    """
    best, phi, theta = _kernels.phase_grid_max(block, grid)
    h = 2 * np.pi / grid
    for _ in range(sweeps):
        old = best
        r = minimize_scalar(lambda x: -_power(block, x, theta), bounds=(phi - h, phi + h),
                            method="bounded", options={"xatol": 1e-12})
        if -r.fun >= best:
            best, phi = -r.fun, float(r.x)
        r = minimize_scalar(lambda x: -_power(block, phi, x), bounds=(theta - h, theta + h),
                            method="bounded", options={"xatol": 1e-12})
        if -r.fun >= best:
            best, theta = -r.fun, float(r.x)
        if best - old <= 1e-15 * max(best, 1e-300):
            break
    return float(best), float(np.mod(phi, 2 * np.pi)), float(np.mod(theta, 2 * np.pi))


@dataclass
class Transmission:
    value: float
    drive_optimum: float
    phi_opt: float
    theta_opt: float

    @property
    def relative_gap(self) -> float:
        if self.value == 0:
            return abs(self.drive_optimum)
        return abs(self.drive_optimum - self.value) / self.value


def transmission(params: ChainParams, direction: str = FWD) -> Transmission:
    """Closed-form efficiency plus the phase-optimized two-port drive that checks it."""
    s = scattering_matrix(params)
    value = closed_form(s, direction)
    best, phi, theta = optimize_phases(two_port_block(params, direction))
    return Transmission(value, best, phi, theta)


def analytic_ratio(n: int, delta: float, v: float, gamma: float) -> float:
    """Forward/backward ratio in closed form.

    ``((d-v)/(d+v))^(2n-4) * [((v-g/2)^2 + (d-v)^2) / ((v-g/2)^2 + (d+v)^2)]^2``
    """
    num = (v - gamma / 2) ** 2 + (delta - v) ** 2
    den = (v - gamma / 2) ** 2 + (delta + v) ** 2
    tail = (num / den) ** 2 if den != 0 else np.inf
    power = 2 * n - 4
    if power == 0:
        return float(tail)
    if delta + v == 0 and delta - v == 0:
        return 1.0
    if delta + v == 0:
        return np.inf
    if delta - v == 0:
        return 0.0
    return float(((delta - v) / (delta + v)) ** power * tail)


def _safe_ratio(fwd: float, bwd: float) -> float:
    if bwd == 0:
        return np.inf if fwd > 0 else np.nan
    return fwd / bwd


def insertion_loss_db(t_fwd: float) -> float:
    return float(-10 * np.log10(t_fwd)) if t_fwd > 0 else np.inf


def contrast_percent(t_fwd: float, t_bwd: float) -> float:
    total = t_fwd + t_bwd
    return float(100 * (t_fwd - t_bwd) / total) if total > 0 else np.nan


def nonreciprocity_ratio(params: ChainParams) -> tuple[float, float]:
    """``(numeric, analytic)`` forward/backward ratio."""
    s = scattering_matrix(params)
    numeric = _safe_ratio(closed_form(s, FWD), closed_form(s, BWD))
    return numeric, analytic_ratio(params.n, params.delta, params.v, params.gamma)


@dataclass
class TransmissionReport:
    T_fwd: float
    T_bwd: float
    ratio_numeric: float
    ratio_analytic: float
    insertion_loss_db: float
    contrast_percent: float
    phi_opt: float
    theta_opt: float
    fwd_relative_gap: float
    bwd_relative_gap: float


def report(params: ChainParams) -> TransmissionReport:
    fwd = transmission(params, FWD)
    bwd = transmission(params, BWD)
    return TransmissionReport(
        T_fwd=fwd.value,
        T_bwd=bwd.value,
        ratio_numeric=_safe_ratio(fwd.value, bwd.value),
        ratio_analytic=analytic_ratio(params.n, params.delta, params.v, params.gamma),
        insertion_loss_db=insertion_loss_db(fwd.value),
        contrast_percent=contrast_percent(fwd.value, bwd.value),
        phi_opt=fwd.phi_opt,
        theta_opt=fwd.theta_opt,
        fwd_relative_gap=fwd.relative_gap,
        bwd_relative_gap=bwd.relative_gap,
    )


# ---------------------------------------------------------------------------
# batched fast path (block-tridiagonal elimination)
# ---------------------------------------------------------------------------


def chain_blocks(n, delta, v, w1, w2, u1, u2, gamma):
    """Blocks of ``H + i v I + M_gamma`` for broadcastable parameter arrays.

    Returns ``D (B, n, 2, 2)``, ``U (B, n-1, 2, 2)`` and ``L (B, n-1, 2, 2)``.
    """
    delta, v, w1, w2, u1, u2, gamma = np.broadcast_arrays(
        *(np.atleast_1d(np.asarray(x, dtype=complex)) for x in (delta, v, w1, w2, u1, u2, gamma))
    )
    nb = delta.shape[0]
    D = np.zeros((nb, n, 2, 2), dtype=complex)
    D[:, :, 0, 0] = (delta + 1j * v)[:, None]
    D[:, :, 1, 1] = (-delta + 1j * v)[:, None]
    D[:, :, 0, 1] = (1j * v)[:, None]
    D[:, :, 1, 0] = (1j * v)[:, None]
    for j in {0, n - 1}:
        D[:, j, 0, 0] -= 0.5j * gamma
        D[:, j, 1, 1] -= 0.5j * gamma
    blk = np.empty((nb, 2, 2), dtype=complex)
    blk[:, 0, 0], blk[:, 0, 1], blk[:, 1, 0], blk[:, 1, 1] = u1, w2, w1, u2
    U = np.repeat(blk[:, None], n - 1, axis=1)
    L = np.conj(np.swapaxes(U, -1, -2))
    return D, U, L


def transmission_arrays(n, delta, v, w1, w2, u1, u2, gamma, backend=None):
    """``(T_fwd, T_bwd)`` arrays over a batch of parameter points.

    ``backend`` is ``"numba"``, ``"numpy"`` or ``None`` for the module default.
    Points where the unpivoted elimination meets a tiny pivot are redone with
    the dense solver.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    D, U, L = chain_blocks(n, delta, v, w1, w2, u1, u2, gamma)
    kernel = {
        None: _kernels.corner_greens,
        "numba": _kernels.corner_greens_numba,
        "numpy": _kernels.corner_greens_numpy,
    }[backend]
    g_n1, g_1n, pivot = kernel(D, U, L)
    bad = ~(pivot >= 1e-12)
    if np.any(bad):
        g_n1[bad], g_1n[bad], _ = _kernels.corner_greens_dense(D[bad], U[bad], L[bad])
    gamma = np.broadcast_to(np.atleast_1d(np.asarray(gamma, dtype=float)), (D.shape[0],))
    t_fwd = 4 * gamma**2 * np.abs(g_n1[:, 1, 0]) ** 2
    t_bwd = 4 * gamma**2 * np.abs(g_1n[:, 0, 1]) ** 2
    return t_fwd, t_bwd


def transmission_reducible(n, delta, v, w, gamma, backend=None):
    w = np.asarray(w, dtype=float)
    return transmission_arrays(n, delta, v, w, w, 1j * w, -1j * w, gamma, backend)


@dataclass
class SweepTable:
    delta_over_v: np.ndarray
    T_fwd: np.ndarray
    T_bwd: np.ndarray
    T_fwd_norm: np.ndarray
    T_bwd_norm: np.ndarray
    ratio_numeric: np.ndarray
    ratio_analytic: np.ndarray
    contrast_percent: np.ndarray

    COLUMNS = (
        "delta_over_v",
        "T_fwd",
        "T_bwd",
        "T_fwd_norm",
        "T_bwd_norm",
        "ratio_numeric",
        "ratio_analytic",
        "contrast_percent",
    )

    def columns(self) -> dict:
        return {c: getattr(self, c) for c in self.COLUMNS}


def sweep_transmission(params: ChainParams, delta_over_v, threads: int = 1) -> SweepTable:
    """Forward/backward efficiencies across ``delta/v`` with the other rates fixed."""
    grid = np.atleast_1d(np.asarray(delta_over_v, dtype=float))
    if grid.size == 0:
        raise ValueError("delta_over_v grid is empty")
    _check_ports(params)

    def one(r):
        s = scattering_matrix(params.replace(delta=r * params.v))
        return closed_form(s, FWD), closed_form(s, BWD)

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one, grid))
    else:
        rows = [one(r) for r in grid]
    fwd, bwd = (np.array(c) for c in zip(*rows))
    p = params
    ratio_num = np.array([_safe_ratio(f, b) for f, b in zip(fwd, bwd)])
    ratio_an = np.array([analytic_ratio(p.n, r * p.v, p.v, p.gamma) for r in grid])
    contrast = np.array([contrast_percent(f, b) for f, b in zip(fwd, bwd)])
    return SweepTable(grid, fwd, bwd, fwd / fwd.max(), bwd / bwd.max(), ratio_num, ratio_an, contrast)
