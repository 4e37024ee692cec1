"""Canned figure runs with pass/fail checks against fixed thresholds."""

from __future__ import annotations

import numpy as np

from . import dynamics, model, optimize, scattering, spectral
from .config import fig2_params, fig3_params


class Check:
    __slots__ = ("name", "value", "target", "passed")

    def __init__(self, name, value, target, passed):
        self.name = name
        self.value = value
        self.target = target
        self.passed = bool(passed)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value} ({self.target})"

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "target": self.target, "passed": self.passed}


def _band(name, value, center, tol):
    return Check(name, float(value), f"{center} +/- {tol}", abs(value - center) <= tol)


def _upper(name, value, bound):
    return Check(name, float(value), f"<= {bound:g}", value <= bound)


FIG2_RATIOS = (1.0, -1.0, 0.0)
FIG2_EXPECTED = {
    1.0: (1, spectral.Localization.LEFT),
    -1.0: (-1, spectral.Localization.RIGHT),
    0.0: (0, spectral.Localization.EXTENDED),
}
REAL_RATIOS = (-2.0, -1.5, -1.2, 1.2, 1.5, 2.0)
COMPLEX_RATIOS = (-0.5, 0.5)


def fig2_checks():
    """Winding, localization, clustering and reality checks on the n=10 chain."""
    checks, data = [], {}
    for r in FIG2_RATIOS:
        p = fig2_params(r)
        w_exp, loc_exp = FIG2_EXPECTED[r]
        wr = spectral.winding_number(p, k_samples=1024)
        spec = spectral.obc_spectrum(p)
        loc = spectral.localization_summary(spec)
        data[r] = (p, spec, wr, loc)
        checks.append(Check(f"W at delta/v={r:g}", wr.winding, f"= {w_exp}", wr.winding == w_exp))
        checks.append(_upper(f"|raw - W| at delta/v={r:g}", abs(wr.raw_phase - wr.winding), 1e-3))
        checks.append(Check(f"localization at delta/v={r:g}", loc.verdict.value, f"= {loc_exp.value}",
                            loc.verdict == loc_exp))
    spec = data[1.0][1]
    dist = spectral.cluster_distances(spec.eigenvalues, (-2, 0, 2))
    checks.append(_upper("cluster radius about {-2, 0, 2} at delta/v=1", dist.max(), 0.2))
    h = model.build_real_space(data[1.0][0], "OBC")
    for e in (-2, 0, 2):
        d = spectral.rank_deficiency(h, e)
        checks.append(Check(f"rank deficiency of H - E I at E={e}", d, ">= 1", d >= 1))
    for r in REAL_RATIOS:
        im = np.abs(spectral.obc_spectrum(fig2_params(r)).eigenvalues.imag).max()
        checks.append(_upper(f"max|Im E| at delta/v={r:g}", im, 1e-6))
    for r in COMPLEX_RATIOS:
        im = np.abs(spectral.obc_spectrum(fig2_params(r)).eigenvalues.imag).max()
        checks.append(Check(f"max|Im E| at delta/v={r:g}", float(im), "> 0.1", im > 0.1))
    hd = spectral.bulk_hausdorff(fig2_params(0.0, n=40), 512)
    checks.append(_upper("PBC/OBC bulk Hausdorff at delta/v=0, n=40", hd, 0.05))
    return checks, data


def fig3_checks():
    """Unidirectional dynamics and the nonreciprocity ratio on the n=5 chain."""
    checks = []
    p = fig3_params(-1.0)
    back = dynamics.evolve(p, dynamics.launch_state(p, "right"), 60.0)
    fwd = dynamics.evolve(p, dynamics.launch_state(p, "left"), 60.0)
    occ = back.unit_occupations()
    checks.append(_upper("backward max(|a1|^2, |b1|^2) over t<=60", occ[:, 0, :].max(), 1e-12))
    u = fwd.unit_occupations()
    checks.append(_upper("forward max| |a_j|^2 - |b_j|^2 |", np.abs(u[..., 0] - u[..., 1]).max(), 1e-9))
    reached = u[:, -1, :].sum(axis=1).max()
    checks.append(Check("forward occupation reaches unit 5", float(reached), "> 1e-3", reached > 1e-3))

    grid = np.linspace(-0.95, 0.95, 25)
    sweep = scattering.sweep_transmission(p, grid)
    rel = np.abs(sweep.ratio_numeric / sweep.ratio_analytic - 1).max()
    checks.append(_upper("numeric vs analytic ratio, max relative error", rel, 1e-6))
    p0 = p.replace(v=0.0, delta=0.05)
    r_num, _ = scattering.nonreciprocity_ratio(p0)
    checks.append(_upper("|ratio - 1| at v=0", abs(r_num - 1), 1e-9))
    s = scattering.scattering_matrix(p)
    checks.append(_upper("|S_1,2n| at delta/v=-1", abs(s[0, -1]), 1e-12))
    return checks, {"params": p, "backward": back, "forward": fwd, "sweep": sweep}


def fig4_checks(threads: int = 1):
    """Optimized transmission at n=20 against the large-n limits."""
    records = optimize.sweep_n(2, 20, threads=threads)
    r = records[-1]
    checks = [
        _band("T_max (n=20)", r.T_max, 0.84, 0.01),
        _band("insertion loss dB (n=20)", r.insertion_loss_db, 0.76, 0.02),
        _band("|w/v| opt (n=20)", r.w_over_v_opt, 0.50, 0.02),
        _band("|v/gamma| opt (n=20)", r.v_over_gamma_opt, 0.71, 0.02),
        _band("contrast % (n=20)", r.contrast_percent, 100.0, 1e-6),
        _upper("|L + 10 log10 T_max|", abs(r.insertion_loss_db + 10 * np.log10(r.T_max)), 1e-9),
    ]
    plateau = optimize.plateau_check(records)
    return checks, {"records": records, "plateau": plateau}


FIGURES = {"fig2": fig2_checks, "fig3": fig3_checks, "fig4": fig4_checks}
