"""Single-excitation time evolution of the lossy chain."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import ConvergenceError
from .model import Boundary, ChainParams, build_real_space, dissipation_matrix

DEFAULT_DT = 0.1


@dataclass
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (len(times), 2n)
    metadata: dict = field(default_factory=dict)

    @property
    def occupations(self) -> np.ndarray:
        """``|amplitude|^2`` per mode, flat order ``a_1, b_1, ...``."""
        return np.abs(self.amplitudes) ** 2

    @property
    def n(self) -> int:
        return self.amplitudes.shape[1] // 2

    def unit_occupations(self) -> np.ndarray:
        """Shape ``(len(times), n, 2)``: ``[..., j, 0] = |a_j|^2``, ``[..., j, 1] = |b_j|^2``."""
        return self.occupations.reshape(len(self.times), self.n, 2)

    def total(self) -> np.ndarray:
        return self.occupations.sum(axis=1)


def dynamical_matrix(params: ChainParams, include_ports: bool = False) -> np.ndarray:
    """OBC Hamiltonian plus the uniform on-site loss ``i v``.

    ``v > 0`` would turn that term into gain and is rejected.  With
    ``include_ports`` the port damping matrix is added as well.
    """
    if params.v > 0:
        raise ValueError(
            f"v = {params.v} > 0: the on-site term i*v would be gain, not loss; use v <= 0"
        )
    h = build_real_space(params, Boundary.OBC) + 1j * params.v * np.eye(params.dim)
    if include_ports:
        h = h + dissipation_matrix(params.n, params.gamma)
    return h


def channel_phase(params: ChainParams) -> float:
    """Relative b/a phase of the transmitting channel.

    ``+pi/2`` launches the ``c`` mode ``(a + i b)/sqrt(2)``, which feeds ``d`` of
    the same unit when ``|delta - v| >= |delta + v|``; otherwise ``-pi/2``
    launches ``d``.
    """
    if abs(params.delta - params.v) >= abs(params.delta + params.v):
        return np.pi / 2
    return -np.pi / 2


def launch_state(params: ChainParams, side: str = "left", phase: float | None = None) -> np.ndarray:
    """``(a_j + e^{i phase} b_j)/sqrt(2)`` on the leftmost or rightmost unit."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    phase = channel_phase(params) if phase is None else phase
    j = 0 if side == "left" else params.n - 1
    psi = np.zeros(params.dim, dtype=complex)
    psi[2 * j] = 1 / np.sqrt(2)
    psi[2 * j + 1] = np.exp(1j * phase) / np.sqrt(2)
    return psi


def time_grid(t_max: float, dt_out: float = DEFAULT_DT) -> np.ndarray:
    if t_max <= 0 or dt_out <= 0:
        raise ValueError("t_max and dt_out must be positive")
    return np.linspace(0.0, t_max, int(round(t_max / dt_out)) + 1)


def evolve(
    params: ChainParams,
    initial: np.ndarray,
    t_max: float,
    dt_out: float = DEFAULT_DT,
    method: str = "expm",
    include_ports: bool = False,
    tol: float = 1e-10,
) -> Trajectory:
    """Sample ``psi(t) = exp(-i H_dyn t) psi(0)`` on a uniform output grid.

    ``method="expm"`` repeatedly applies the scaling-and-squaring propagator
    for one output step; ``method="rk45"`` runs the adaptive Dormand-Prince
    kernel with local tolerance ``tol``.
    """
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.shape != (params.dim,):
        raise ValueError(f"initial state must have length {params.dim}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    h = dynamical_matrix(params, include_ports)
    times = time_grid(t_max, dt_out)

    if method == "expm":
        step = scipy.linalg.expm(-1j * h * (times[1] - times[0]))
        amps = np.empty((times.size, params.dim), dtype=complex)
        amps[0] = psi0
        for i in range(1, times.size):
            amps[i] = step @ amps[i - 1]
        info = {}
    elif method == "rk45":
        amps, steps, rejected, status = _kernels.dopri5(h, psi0, times, tol)
        if status != _kernels.OK:
            reason = "step size underflow" if status == _kernels.STEP_UNDERFLOW else "step cap hit"
            raise ConvergenceError(f"integrator failed: {reason}", diagnostic={"steps": steps})
        info = {"steps": int(steps), "rejected": int(rejected)}
    else:
        raise ValueError(f"unknown method {method!r}")

    meta = {
        "params": params.to_dict(),
        "initial": [[z.real, z.imag] for z in psi0],
        "method": method,
        "include_ports": include_ports,
        **info,
    }
    return Trajectory(times, amps, meta)


def snapshot(trajectory: Trajectory, t: float) -> list[tuple[int, float, float]]:
    """``(unit, |a_j|^2, |b_j|^2)`` at the sampled time nearest ``t``."""
    times = trajectory.times
    if t < times[0] or t > times[-1]:
        raise ValueError(f"t = {t} outside [{times[0]}, {times[-1]}]")
    i = int(np.argmin(np.abs(times - t)))
    occ = trajectory.unit_occupations()[i]
    return [(j + 1, float(occ[j, 0]), float(occ[j, 1])) for j in range(trajectory.n)]
