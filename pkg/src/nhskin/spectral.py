"""Spectra, PBC loci, point-gap winding numbers and skin localization."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BasePointError, ConvergenceError, NumericalError
from .model import Boundary, ChainParams, bloch_transformed, build_bloch, build_real_space

RESIDUAL_GATE = 1e-8


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    residuals: np.ndarray
    profiles: np.ndarray

    @property
    def n(self) -> int:
        return self.profiles.shape[1]


@dataclass
class PBCLocus:
    k: np.ndarray
    bands: np.ndarray  # (k_samples, 2)

    def points(self) -> np.ndarray:
        return self.bands.ravel()


@dataclass
class WindingResult:
    base_point: complex
    winding: int
    raw_phase: float
    k_samples: int


class Localization(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"
    EXTENDED = "EXTENDED"


@dataclass
class LocalizationSummary:
    centers: np.ndarray
    mean_center: float
    verdict: Localization


def sort_spectrum(values: np.ndarray) -> np.ndarray:
    """Permutation sorting eigenvalues lexicographically by (Re, Im)."""
    values = np.asarray(values)
    return np.lexsort((values.imag, values.real))


def unit_profiles(vectors: np.ndarray) -> np.ndarray:
    """Per-unit populations ``|psi(a_j)|^2 + |psi(b_j)|^2`` of each column, rows sum to 1."""
    pop = np.abs(vectors) ** 2
    per_unit = pop.reshape(pop.shape[0] // 2, 2, pop.shape[1]).sum(axis=1).T
    return per_unit / per_unit.sum(axis=1, keepdims=True)


def diagonalize(h: np.ndarray) -> SpectrumResult:
    """Full eigendecomposition of a dense non-Hermitian matrix.

    Eigenvalues come out sorted by (Re, Im); eigenvectors are unit-norm
    columns.  Raises :class:`ConvergenceError` when LAPACK fails or any
    residual exceeds ``1e-8 * ||H||_2``.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"square matrix required, got shape {h.shape}")
    try:
        vals, vecs = np.linalg.eig(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    order = sort_spectrum(vals)
    vals, vecs = vals[order], vecs[:, order]
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    resid = np.linalg.norm(h @ vecs - vecs * vals, axis=0)
    bound = RESIDUAL_GATE * max(np.linalg.norm(h, 2), np.finfo(float).tiny)
    if np.any(resid > bound):
        raise ConvergenceError(
            f"eigenpair residual {resid.max():.3e} exceeds gate {bound:.3e}",
            diagnostic={"eigenvalues": vals, "residuals": resid},
        )
    profiles = unit_profiles(vecs) if h.shape[0] % 2 == 0 else np.abs(vecs.T) ** 2
    return SpectrumResult(vals, vecs, resid, profiles)


def obc_spectrum(params: ChainParams) -> SpectrumResult:
    return diagonalize(build_real_space(params, Boundary.OBC))


def rank_deficiency(h: np.ndarray, energy: complex, rtol: float = 1e-10) -> int:
    """Number of singular values of ``H - E I`` below ``rtol * sigma_max``."""
    sv = np.linalg.svd(h - energy * np.eye(h.shape[0]), compute_uv=False)
    return int(np.sum(sv <= rtol * sv[0]))


def cluster_distances(values: np.ndarray, centers) -> np.ndarray:
    """Distance from every eigenvalue to its nearest cluster centre."""
    centers = np.asarray(centers, dtype=complex)
    return np.abs(np.asarray(values)[:, None] - centers[None, :]).min(axis=1)


def min_overlap_angle(spectrum: SpectrumResult) -> float:
    """Smallest angle (radians) between any two eigenvectors.

    Collapses towards zero at exceptional points where eigenvectors coalesce.
    """
    v = spectrum.right_eigenvectors
    g = np.abs(v.conj().T @ v)
    np.fill_diagonal(g, 0.0)
    return float(np.arccos(np.clip(g.max(), 0.0, 1.0)))


def _bloch_stack(params: ChainParams, k: np.ndarray, transformed: bool) -> np.ndarray:
    if transformed:
        return np.array([bloch_transformed(params, kk) for kk in k])
    return np.array([build_bloch(params, kk).h for kk in k])


def _track(bands: np.ndarray) -> np.ndarray:
    # two-band nearest-neighbour continuation; ties keep the current order
    out = bands.copy()
    for i in range(1, out.shape[0]):
        prev = out[i - 1]
        cur = out[i]
        keep = abs(cur[0] - prev[0]) + abs(cur[1] - prev[1])
        swap = abs(cur[1] - prev[0]) + abs(cur[0] - prev[1])
        if swap < keep - 1e-12 * max(keep, 1.0):
            out[i] = cur[::-1]
    return out


def pbc_locus(params: ChainParams, k_samples: int = 512) -> PBCLocus:
    """Both Bloch bands on a closed uniform grid over ``[-pi, pi]``."""
    if k_samples < 16:
        raise ValueError("k_samples must be >= 16")
    k = np.linspace(-np.pi, np.pi, k_samples)
    vals = np.linalg.eigvals(_bloch_stack(params, k, transformed=False))
    return PBCLocus(k, _track(vals))


def polygon_area(path: np.ndarray) -> float:
    """Signed shoelace area of a closed complex path (positive = anticlockwise)."""
    x, y = path.real, path.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(path: np.ndarray) -> complex:
    x, y = path.real, path.imag
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    area = 0.5 * cross.sum()
    if abs(area) < 1e-14:
        return complex(path.mean())
    cx = np.sum((x + np.roll(x, -1)) * cross) / (6 * area)
    cy = np.sum((y + np.roll(y, -1)) * cross) / (6 * area)
    return complex(cx, cy)


def point_in_polygon(point: complex, path: np.ndarray) -> bool:
    """Even-odd ray casting test; the path is closed implicitly."""
    x, y = path.real, path.imag
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    px, py = point.real, point.imag
    crosses = (y > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x + (py - y) * (x2 - x) / (y2 - y)
    return bool(np.count_nonzero(crosses & (px < xint)) % 2)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d = np.abs(np.asarray(a).ravel()[:, None] - np.asarray(b).ravel()[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def edge_mode_mask(spectrum: SpectrumResult, threshold: float = 0.9) -> np.ndarray:
    """Modes with at least ``threshold`` of their weight in the outer quarters of the chain.

    Skin modes also pass this test, so the mask is only meaningful for
    chains without skin effect (e.g. ``delta = 0``).
    """
    n = spectrum.n
    q = max(1, n // 4)
    outer = spectrum.profiles[:, :q].sum(axis=1) + spectrum.profiles[:, n - q :].sum(axis=1)
    return outer >= threshold


def bulk_hausdorff(params: ChainParams, k_samples: int = 512) -> float:
    """Hausdorff distance between the PBC locus and the OBC spectrum minus edge modes.

    NaN when every OBC mode sits at an edge (the skin-effect regime).
    """
    spec = obc_spectrum(params)
    bulk = spec.eigenvalues[~edge_mode_mask(spec)]
    if bulk.size == 0:
        return float("nan")
    return hausdorff(bulk, pbc_locus(params, k_samples).points())


def auto_base_point(params: ChainParams, k_samples: int = 512, fallback=None) -> complex:
    """Pick a base energy for the winding number.

    Tries each band's polygon centroid and keeps the first strictly inside its
    own loop.  Otherwise uses ``fallback`` or, failing that, the mean of the
    whole locus provided it stays clear of the locus.
    """
    locus = pbc_locus(params, k_samples)
    pts = locus.points()
    scale = max(1.0, float(np.abs(pts).max()))
    clearance = 1e-3 * scale
    for band in locus.bands.T:
        path = band[:-1]
        if abs(polygon_area(path)) < 1e-10 * scale**2:
            continue
        c = polygon_centroid(path)
        if point_in_polygon(c, path) and np.abs(pts - c).min() > clearance:
            return c
    if fallback is not None:
        return complex(fallback)
    c = complex(pts.mean())
    if np.abs(pts - c).min() > clearance:
        return c
    raise BasePointError("no interior base point found; supply one explicitly")


def winding_number(
    params: ChainParams,
    base_point: complex | None = None,
    k_samples: int = 1024,
    transformed: bool = False,
) -> WindingResult:
    """Point-gap winding of ``det[H(k) - E_b]`` around the Brillouin zone.

    ``transformed=True`` evaluates the determinant on the rotated SSH Bloch
    matrix instead of the original one (the two must agree).
    """
    if k_samples < 64:
        raise ValueError("k_samples must be >= 64")
    eb = auto_base_point(params) if base_point is None else complex(base_point)
    k = -np.pi + 2 * np.pi * np.arange(k_samples) / k_samples
    hk = _bloch_stack(params, k, transformed)
    det = (hk[:, 0, 0] - eb) * (hk[:, 1, 1] - eb) - hk[:, 0, 1] * hk[:, 1, 0]
    scale = (np.abs(hk).max() + abs(eb)) ** 2
    if np.abs(det).min() < 1e-12 * scale:
        raise BasePointError(f"base point {eb} lies on the PBC spectrum")
    steps = np.angle(np.roll(det, -1) / det)
    raw = float(steps.sum() / (2 * np.pi))
    w = int(round(raw))
    if abs(raw - w) > 0.1:
        raise NumericalError(f"winding phase {raw:.4f} is not near an integer; raise k_samples")
    return WindingResult(eb, w, raw, k_samples)


def localization_summary(spectrum: SpectrumResult, n: int | None = None) -> LocalizationSummary:
    """Centre of mass of each mode's unit profile and an ensemble verdict."""
    n = spectrum.n if n is None else n
    units = np.arange(1, n + 1)
    centers = spectrum.profiles @ units
    mean = float(centers.mean())
    mid = (n + 1) / 2
    if mean < mid - n / 4:
        verdict = Localization.LEFT
    elif mean > mid + n / 4:
        verdict = Localization.RIGHT
    else:
        verdict = Localization.EXTENDED
    return LocalizationSummary(centers, mean, verdict)


def sweep_delta(params: ChainParams, delta_over_v, threads: int = 1) -> np.ndarray:
    """Sorted OBC spectra for each ``delta/v``; shape ``(len(grid), 2n)``."""
    grid = np.atleast_1d(np.asarray(delta_over_v, dtype=float))
    if grid.size == 0:
        raise ValueError("delta_over_v grid is empty")

    def one(r):
        return obc_spectrum(params.replace(delta=r * params.v)).eigenvalues

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one, grid))
    else:
        rows = [one(r) for r in grid]
    return np.array(rows)
