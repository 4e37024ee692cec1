"""Forward-transmission optimization at the unidirectional point ``delta/v = -1``."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import NumericalError
from .scattering import contrast_percent, insertion_loss_db, transmission_reducible

DELTA_OVER_V = -1.0
GAMMA = 0.1
BOX = 4.0
BOX_LOW = 1e-2
GRID = 64


def _rates(x, y, gamma):
    # x = |w/v|, y = |v/gamma|; v < 0 throughout
    v = -np.asarray(y) * gamma
    w = np.asarray(x) * np.abs(v)
    return DELTA_OVER_V * v, v, w


def forward_transmission(n: int, w_over_v, v_over_gamma, gamma: float = GAMMA, backend=None):
    """``(T_fwd, T_bwd)`` at ``delta/v = -1`` for arrays of ``|w/v|`` and ``|v/gamma|``."""
    delta, v, w = _rates(w_over_v, v_over_gamma, gamma)
    return transmission_reducible(n, delta, v, w, gamma, backend)


@dataclass
class OptimumRecord:
    n: int
    w_over_v_opt: float
    v_over_gamma_opt: float
    T_max: float
    T_bwd: float
    insertion_loss_db: float
    contrast_percent: float
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _search(n, box, tolerance, gamma, backend):
    axis = np.geomspace(BOX_LOW, box, GRID)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    t_grid, _ = forward_transmission(n, xx.ravel(), yy.ravel(), gamma, backend)
    i = int(np.argmax(t_grid))
    start = np.log([xx.ravel()[i], yy.ravel()[i]])

    def objective(p):
        return -forward_transmission(n, np.exp(p[:1]), np.exp(p[1:]), gamma, backend)[0][0]

    res = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={"xatol": tolerance, "fatol": 1e-15, "maxiter": 20000, "maxfev": 40000},
    )
    simplex = res.final_simplex[0]
    size = float(np.abs(simplex - simplex[0]).max())
    return res, float(t_grid[i]), size


def optimize_forward(
    n: int, tolerance: float = 1e-6, gamma: float = GAMMA, backend=None
) -> OptimumRecord:
    """Maximize ``T_fwd`` over ``(|w/v|, |v/gamma|)``.

    A 64 x 64 log-spaced grid over ``[0.01, 4]^2`` seeds a Nelder-Mead
    refinement in log coordinates.  An optimum pinned at the upper box edge
    triggers one rerun on a doubled box; if it persists a NumericalError is
    raised.  Refinement failure keeps the best point and sets
    ``converged=False`` with a warning.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    box = BOX
    for attempt in range(2):
        res, grid_best, size = _search(n, box, tolerance, gamma, backend)
        x, y = np.exp(res.x)
        edge = box * (1 - 1e-3)
        if x < edge and y < edge and x > BOX_LOW and y > BOX_LOW:
            break
        if attempt == 1:
            raise NumericalError(
                f"optimum for n={n} stays on the search-box boundary ({x:.4g}, {y:.4g})"
            )
        box *= 2
    converged = bool(res.success)
    t_max = -float(res.fun)
    if not converged or t_max < grid_best:
        warnings.warn(f"refinement for n={n} did not converge: {res.message}", stacklevel=2)
        converged = False
    t_fwd, t_bwd = forward_transmission(n, [x], [y], gamma, backend)
    t_fwd, t_bwd = float(t_fwd[0]), float(t_bwd[0])
    return OptimumRecord(
        n=n,
        w_over_v_opt=float(x),
        v_over_gamma_opt=float(y),
        T_max=t_fwd,
        T_bwd=t_bwd,
        insertion_loss_db=insertion_loss_db(t_fwd),
        contrast_percent=contrast_percent(t_fwd, t_bwd),
        converged=converged,
        diagnostics={
            "iterations": int(res.nit),
            "evaluations": int(res.nfev),
            "simplex_size": size,
            "grid_best": grid_best,
            "box": box,
        },
    )


def sweep_n(n_min: int, n_max: int, tolerance: float = 1e-6, threads: int = 1, **kw):
    """One :class:`OptimumRecord` per chain length in ``[n_min, n_max]``."""
    if not 2 <= n_min <= n_max <= 64:
        raise ValueError("need 2 <= n_min <= n_max <= 64")
    ns = range(n_min, n_max + 1)
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda n: optimize_forward(n, tolerance, **kw), ns))
    return [optimize_forward(n, tolerance, **kw) for n in ns]


@dataclass
class PlateauReport:
    n: list
    T_max: list
    differences: list
    differences_decreasing: bool
    richardson_limit: float
    tail_average: float
    last_gap_richardson: float
    last_gap_tail: float
    within_tolerance: bool
    approach: str
    peak_n: int
    non_increasing_after_peak: bool


def plateau_check(records, tolerance: float = 0.01, tail: int = 5) -> PlateauReport:
    """Convergence of ``T_max(n)`` towards its large-n limit.

    The limit is extrapolated from the last two records assuming
    ``T(n) = T_inf + a/n``; ``within_tolerance`` compares the last value with
    that extrapolation.  A plain average of the last ``tail`` values is
    reported alongside.
    """
    ns = [r.n for r in records]
    ts = [r.T_max for r in records]
    if len(records) < 3:
        raise ValueError("plateau_check needs at least three records")
    diffs = [abs(b - a) for a, b in zip(ts, ts[1:])]
    late = diffs[len(diffs) // 2 :]
    decreasing = all(b <= a + 1e-12 for a, b in zip(late, late[1:]))
    n1, n2 = ns[-2], ns[-1]
    limit = (n2 * ts[-1] - n1 * ts[-2]) / (n2 - n1)
    tail_avg = float(np.mean(ts[-tail:]))
    peak = int(np.argmax(ts))
    after = ts[peak:]
    non_inc = all(b <= a + 1e-9 for a, b in zip(after, after[1:]))
    gap = ts[-1] - limit
    return PlateauReport(
        n=ns,
        T_max=ts,
        differences=diffs,
        differences_decreasing=decreasing,
        richardson_limit=float(limit),
        tail_average=tail_avg,
        last_gap_richardson=float(abs(gap)),
        last_gap_tail=float(abs(ts[-1] - tail_avg)),
        within_tolerance=bool(abs(gap) <= tolerance),
        approach="above" if gap > 0 else "below",
        peak_n=ns[peak],
        non_increasing_after_peak=non_inc,
    )


def unidirectional_limit(n: int = 20, gamma: float = GAMMA, w_over_v: float = 0.5):
    """Best ``T_fwd`` over ``|v/gamma|`` with ``|w/v|`` pinned (1/2 makes it n-independent).

    Returns ``(T, v_over_gamma, insertion_loss_db)``.
    """
    res = minimize_scalar(
        lambda y: -forward_transmission(n, [w_over_v], [y], gamma)[0][0],
        bounds=(BOX_LOW, BOX),
        method="bounded",
        options={"xatol": 1e-10},
    )
    t = -float(res.fun)
    return t, float(res.x), insertion_loss_db(t)


def conditional_slices(record: OptimumRecord, num: int = 101, gamma: float = GAMMA, profile=False):
    """``T_fwd``/``T_bwd`` along each optimization axis through the optimum.

    With ``profile=False`` the other ratio stays at its optimum; with
    ``profile=True`` it is re-optimized at every slice point.
    """
    n = record.n
    xs = np.linspace(0.05, 2.0 * record.w_over_v_opt, num)
    ys = np.linspace(0.05, 2.0 * record.v_over_gamma_opt, num)

    def best_other(fixed, which):
        def obj(z):
            args = ([fixed], [z]) if which == "y" else ([z], [fixed])
            return -forward_transmission(n, *args, gamma)[0][0]

        r = minimize_scalar(obj, bounds=(BOX_LOW, BOX), method="bounded", options={"xatol": 1e-8})
        return float(r.x)

    if profile:
        y_for_x = np.array([best_other(x, "y") for x in xs])
        x_for_y = np.array([best_other(y, "x") for y in ys])
    else:
        y_for_x = np.full(num, record.v_over_gamma_opt)
        x_for_y = np.full(num, record.w_over_v_opt)
    fx, bx = forward_transmission(n, xs, y_for_x, gamma)
    fy, by = forward_transmission(n, x_for_y, ys, gamma)
    return {
        "w_over_v": xs,
        "T_fwd_vs_w": fx,
        "T_bwd_vs_w": bx,
        "v_over_gamma": ys,
        "T_fwd_vs_v": fy,
        "T_bwd_vs_v": by,
    }
