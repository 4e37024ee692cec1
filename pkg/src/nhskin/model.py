"""Hamiltonians of the dissipatively coupled two-mode chain.

Flat mode ordering is ``(a_1, b_1, a_2, b_2, ..., a_n, b_n)``: ``a_j`` sits at
0-based index ``2(j-1)`` and ``b_j`` at ``2(j-1)+1``.  All rates are
dimensionless, measured in units of the auxiliary-mode decay rate.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NotReducibleError

REDUCIBLE_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
UNIT_BLOCK = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)


class Boundary(str, Enum):
    OBC = "OBC"
    PBC = "PBC"


class Sublattice(str, Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class ModeIndex:
    """A mode addressed by unit cell (1-based) and sublattice."""

    unit: int
    sublattice: Sublattice

    @property
    def flat(self) -> int:
        """0-based position in the flat ordering."""
        return 2 * (self.unit - 1) + (0 if self.sublattice is Sublattice.A else 1)

    @classmethod
    def from_flat(cls, index: int) -> "ModeIndex":
        return cls(index // 2 + 1, Sublattice.A if index % 2 == 0 else Sublattice.B)


@dataclass(frozen=True)
class ChainParams:
    """Rates of the chain plus its boundary condition.

    ``w1`` couples ``b_j -> a_{j+1}``, ``w2`` couples ``a_j -> b_{j+1}``, and
    ``u1``/``u2`` are the same-sublattice hops ``a_j -> a_{j+1}`` and
    ``b_j -> b_{j+1}``.  ``delta`` is the a/b detuning, ``v`` the dissipative
    intracell coupling and ``gamma`` the port damping rate.
    """

    n: int
    delta: float
    v: float
    w1: complex = 0.0
    w2: complex = 0.0
    u1: complex = 0.0
    u2: complex = 0.0
    gamma: float = 0.0
    bc: Boundary = Boundary.OBC

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "gamma", float(self.gamma))
        for name in ("w1", "w2", "u1", "u2"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "bc", Boundary(self.bc))

    @classmethod
    def reducible(cls, n, delta, v, w, gamma=0.0, bc=Boundary.OBC) -> "ChainParams":
        """Couplings ``w1 = w2 = w`` (real) and ``u1 = -u2 = i w``."""
        w = float(w)
        return cls(n, delta, v, w, w, 1j * w, -1j * w, gamma, bc)

    @classmethod
    def from_ratios(cls, n, delta_over_v, v, w_over_v=None, gamma=0.0, bc=Boundary.OBC):
        """Reducible chain from ``delta/v`` and ``|w/v|`` (w keeps positive sign)."""
        w = abs(w_over_v * v) if w_over_v is not None else 0.0
        return cls.reducible(n, delta_over_v * v, v, w, gamma, bc)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def w(self) -> float:
        """The common real coupling of a reducible chain."""
        if not self.is_ssh_reducible:
            raise NotReducibleError("chain couplings are not of the reducible form")
        return self.w1.real

    @property
    def is_ssh_reducible(self) -> bool:
        tol = REDUCIBLE_TOL
        w = self.w1
        return (
            abs(self.w1 - self.w2) <= tol
            and abs(w.imag) <= tol
            and abs(self.u1 - 1j * w) <= tol
            and abs(self.u2 + 1j * w) <= tol
        )

    def replace(self, **changes) -> "ChainParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        def c(z):
            return [z.real, z.imag]

        return {
            "n": self.n,
            "delta": self.delta,
            "v": self.v,
            "w1": c(self.w1),
            "w2": c(self.w2),
            "u1": c(self.u1),
            "u2": c(self.u2),
            "gamma": self.gamma,
            "bc": self.bc.value,
        }


@dataclass(frozen=True)
class BlochMatrix:
    k: float
    d0: complex
    dx: complex
    dy: complex
    dz: complex

    @property
    def h(self) -> np.ndarray:
        return (
            self.d0 * np.eye(2)
            + self.dx * SIGMA_X
            + self.dy * SIGMA_Y
            + self.dz * SIGMA_Z
        )


def _intercell_terms(p: ChainParams):
    # (row sublattice, column sublattice, coefficient) for the j -> j+1 hops
    return ((1, 0, p.w1), (0, 1, p.w2), (0, 0, p.u1), (1, 1, p.u2))


def build_real_space(params: ChainParams, bc: Boundary | str | None = None) -> np.ndarray:
    """Dense ``2n x 2n`` single-excitation Hamiltonian.

    The dissipative term ``iv`` appears on both intracell off-diagonals with
    no conjugate partner; only the coherent ``w``/``u`` hops get their
    Hermitian conjugates.
    """
    p = params
    bc = Boundary(bc) if bc is not None else p.bc
    n = p.n
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    idx = np.arange(n)
    h[2 * idx, 2 * idx] = p.delta
    h[2 * idx + 1, 2 * idx + 1] = -p.delta
    h[2 * idx, 2 * idx + 1] = 1j * p.v
    h[2 * idx + 1, 2 * idx] = 1j * p.v

    links = [(j, j + 1) for j in range(n - 1)]
    if bc is Boundary.PBC:
        links.append((n - 1, 0))
    for j, k in links:
        for sr, sc, coef in _intercell_terms(p):
            r, c = 2 * j + sr, 2 * k + sc
            h[r, c] += coef
            h[c, r] += np.conj(coef)
    return h


def build_bloch(params: ChainParams, k: float) -> BlochMatrix:
    """Bloch form ``d0 I + d . sigma`` for arbitrary complex couplings.

    d0, dz and dx follow ``Re(z e^{ik})`` of the sums/differences of the hops;
    ``dy = Im((w1 - w2) e^{ik})`` is what the Fourier transform of
    :func:`build_real_space` produces.
    """
    p = params
    e = np.exp(1j * k)
    d0 = ((p.u1 + p.u2) * e).real
    dz = p.delta + ((p.u1 - p.u2) * e).real
    dx = 1j * p.v + ((p.w1 + p.w2) * e).real
    dy = ((p.w1 - p.w2) * e).imag
    return BlochMatrix(float(k), complex(d0), complex(dx), complex(dy), complex(dz))


def bloch_transformed(params: ChainParams, k: float) -> np.ndarray:
    """``U_k^{-1} H_k U_k`` for a reducible chain, in closed form."""
    _require_reducible(params)
    p, w = params, params.w
    return np.array(
        [
            [0.0, p.delta + p.v - 2j * w * np.exp(-1j * k)],
            [p.delta - p.v + 2j * w * np.exp(1j * k), 0.0],
        ],
        dtype=complex,
    )


def build_ssh_equivalent(params: ChainParams, bc: Boundary | str | None = None) -> np.ndarray:
    """Non-Hermitian SSH matrix in the ``(c_j, d_j)`` basis.

    Intracell: ``H[c_j, d_j] = delta + v``, ``H[d_j, c_j] = delta - v``.
    Intercell: ``H[d_j, c_{j+1}] = 2iw`` and ``H[c_{j+1}, d_j] = -2iw``.
    """
    _require_reducible(params)
    p, w = params, params.w
    bc = Boundary(bc) if bc is not None else p.bc
    n = p.n
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    idx = np.arange(n)
    h[2 * idx, 2 * idx + 1] = p.delta + p.v
    h[2 * idx + 1, 2 * idx] = p.delta - p.v
    links = [(j, j + 1) for j in range(n - 1)]
    if bc is Boundary.PBC:
        links.append((n - 1, 0))
    for j, k in links:
        h[2 * j + 1, 2 * k] += 2j * w
        h[2 * k, 2 * j + 1] += -2j * w
    return h


def unitary_transform(n: int) -> np.ndarray:
    """Block-diagonal ``U = diag(U_k, ..., U_k)`` with ``U_k = [[1, 1], [i, -i]]/sqrt(2)``.

    Column ``2j`` is the ``c_j`` mode and column ``2j+1`` the ``d_j`` mode
    expressed in the ``(a, b)`` basis.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.kron(np.eye(n), UNIT_BLOCK)


def parity(n: int) -> np.ndarray:
    """Local parity: ``sigma_x`` on every unit cell (swaps ``a_j`` and ``b_j``)."""
    return np.kron(np.eye(n), SIGMA_X)


def staggered_gauge(n: int) -> np.ndarray:
    """``diag((-1)^j)`` over unit cells, both sublattices."""
    return np.kron(np.diag((-1.0) ** np.arange(n)), np.eye(2))


def check_anti_pt(h: np.ndarray, n: int, gauge: str | None = None, tol: float = 1e-12):
    """Test ``P conj(H) P = -H`` and return ``(holds, residual)``.

    Time reversal is entry-wise complex conjugation.  ``gauge="staggered"``
    composes it with :func:`staggered_gauge`, the time-reversal operator under
    which a reducible open chain with real ``w`` is anti-PT symmetric.
    """
    h = np.asarray(h)
    if h.shape != (2 * n, 2 * n):
        raise ValueError(f"expected a {2 * n}x{2 * n} matrix, got {h.shape}")
    op = parity(n)
    if gauge == "staggered":
        op = op @ staggered_gauge(n)
    elif gauge is not None:
        raise ValueError(f"unknown gauge {gauge!r}")
    resid = np.abs(op @ h.conj() @ op.T + h).max(initial=0.0)
    return bool(resid <= tol), float(resid)


def dissipation_matrix(n: int, gamma: float) -> np.ndarray:
    """Port damping ``-i gamma/2`` on both modes of the first and last unit."""
    if n < 2:
        raise ValueError("the port dissipation matrix needs n >= 2")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    diag = np.zeros(2 * n, dtype=complex)
    diag[[0, 1, 2 * n - 2, 2 * n - 1]] = -0.5j * gamma
    return np.diag(diag)


def _require_reducible(params: ChainParams) -> None:
    if not params.is_ssh_reducible:
        raise NotReducibleError(
            "operation needs w1 = w2 = w real and u1 = -u2 = i w; got "
            f"w1={params.w1}, w2={params.w2}, u1={params.u1}, u2={params.u2}"
        )
