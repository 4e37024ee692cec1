"""Command-line front end: ``nhskin <command> [--config PATH] [--out DIR] ...``.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 a
reproduction check failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, dynamics, io, optimize, reproduce, scattering, spectral
from .config import RunConfig, fig2_params, fig3_params
from .errors import ConfigError, NumericalError
from .svg import Plot

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_REPRODUCE = 0, 2, 3, 4

CONVENTIONS = {
    "mode_order": "a_1, b_1, a_2, b_2, ... (flat index 1 is a_1, 2n is b_n)",
    "units": "rates in units of kappa, times in 1/kappa",
    "contrast_percent": "100 (T_fwd - T_bwd) / (T_fwd + T_bwd)",
    "insertion_loss_db": "-10 log10 T_fwd",
    "w_sign": "w > 0",
    "infinity": "inf",
}


class Run:
    """Output directory, table format and the list of files written."""

    def __init__(self, out: Path, fmt: str, threads: int):
        self.out = out
        self.fmt = fmt
        self.threads = threads
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def table(self, stem: str, columns: dict) -> None:
        path = io.write_table(self.out / stem, columns, self.fmt)
        self.files.append(path.name)

    def json(self, name: str, obj) -> None:
        io.write_json(self.out / name, obj)
        self.files.append(name)

    def plot(self, name: str, plot: Plot) -> None:
        plot.save(self.out / name)
        self.files.append(name)

    def metadata(self, command: str, config: dict, summary: dict) -> None:
        io.write_json(
            self.out / "metadata.json",
            {
                "command": command,
                "version": __version__,
                "config": config,
                "format": self.fmt,
                "files": sorted(self.files),
                "conventions": CONVENTIONS,
                "summary": summary,
            },
        )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def spectrum_plot(spec, locus, title) -> Plot:
    plot = Plot(title=title, xlabel="Re E", ylabel="Im E")
    for b in range(locus.bands.shape[1]):
        plot.line(locus.bands[:, b].real, locus.bands[:, b].imag, label=f"PBC band {b + 1}",
                  color="#1f77b4")
    plot.scatter(spec.eigenvalues.real, spec.eigenvalues.imag, label="OBC", color="#222222")
    return plot


def cmd_spectrum(cfg: RunConfig, run: Run):
    params = cfg.model or fig2_params()
    opts = cfg.spectrum
    spec = spectral.obc_spectrum(params)
    locus = spectral.pbc_locus(params, opts.k_samples)
    run.table("obc_spectrum", io.spectrum_columns(spec))
    run.table("pbc_locus", io.locus_columns(locus))
    run.table("profiles", io.profile_columns(spec))
    run.plot("spectrum.svg", spectrum_plot(spec, locus, f"n={params.n}, delta/v={_ratio(params)}"))
    loc = spectral.localization_summary(spec)
    summary = {
        "modes": spec.eigenvalues.size,
        "max_residual": float(spec.residuals.max()),
        "max_abs_im": float(np.abs(spec.eigenvalues.imag).max()),
        "localization": loc.verdict.value,
        "mean_center": loc.mean_center,
        "hausdorff": spectral.hausdorff(spec.eigenvalues, locus.points()),
        "bulk_hausdorff": spectral.bulk_hausdorff(params, opts.k_samples),
    }
    if opts.sweep is not None:
        grid = np.asarray(opts.sweep)
        table = spectral.sweep_delta(params, grid, run.threads)
        m = table.shape[1]
        run.table(
            "obc_sweep",
            {
                "delta_over_v": np.repeat(grid, m),
                "index": np.tile(np.arange(m), grid.size),
                "re_E": table.real.ravel(),
                "im_E": table.imag.ravel(),
            },
        )
        for part, label in ((np.real, "Re E"), (np.imag, "Im E")):
            plot = Plot(title="OBC spectrum vs delta/v", xlabel="delta/v", ylabel=label)
            plot.scatter(np.repeat(grid, m), part(table).ravel())
            run.plot(f"obc_sweep_{label[:2].lower()}.svg", plot)
        summary["sweep_max_abs_im"] = np.abs(table.imag).max(axis=1)
    return params, summary


def cmd_winding(cfg: RunConfig, run: Run):
    params = cfg.model or fig2_params()
    opts = cfg.winding
    eb = None if opts.base_point is None else complex(*opts.base_point)
    res = spectral.winding_number(params, eb, opts.k_samples)
    body = {
        "W": res.winding,
        "raw_phase": res.raw_phase,
        "base_point": [res.base_point.real, res.base_point.imag],
        "k_samples": res.k_samples,
        "w_sign": "+" if params.w1.real >= 0 else "-",
    }
    run.json("winding.json", body)
    return params, body


def trajectory_plot(traj, title) -> Plot:
    plot = Plot(title=title, xlabel="t (1/kappa)", ylabel="occupation")
    occ = traj.occupations
    for j in range(traj.n):
        plot.line(traj.times, occ[:, 2 * j], label=f"|a{j + 1}|^2")
        plot.line(traj.times, occ[:, 2 * j + 1], label=f"|b{j + 1}|^2")
    return plot


def cmd_dynamics(cfg: RunConfig, run: Run):
    params = cfg.model or fig3_params()
    opts = cfg.dynamics
    sides = ("left", "right") if opts.launch == "both" else (opts.launch,)
    summary = {"phase": opts.phase if opts.phase is not None else dynamics.channel_phase(params)}
    for side in sides:
        psi0 = dynamics.launch_state(params, side, opts.phase)
        traj = dynamics.evolve(params, psi0, opts.t_max, opts.dt_out, opts.method, opts.include_ports)
        run.table(f"trajectory_{side}", io.trajectory_columns(traj))
        run.table(f"snapshot_{side}", io.snapshot_columns(dynamics.snapshot(traj, opts.t_max)))
        run.plot(f"dynamics_{side}.svg", trajectory_plot(traj, f"launch {side}"))
        u = traj.unit_occupations()
        total = traj.total()
        summary[side] = {
            "max_leftmost_occupation": float(u[:, 0, :].max()),
            "max_rightmost_occupation": float(u[:, -1, :].max()),
            "max_unit_imbalance": float(np.abs(u[..., 0] - u[..., 1]).max()),
            "final_total": float(total[-1]),
            "max_total_increase": float(max(0.0, np.diff(total).max())),
        }
    return params, summary


def cmd_scattering(cfg: RunConfig, run: Run):
    params = cfg.model or fig3_params()
    grid = np.asarray(cfg.scattering.delta_over_v)
    sweep = scattering.sweep_transmission(params, grid, run.threads)
    run.table("sweep", sweep.columns())
    plot = Plot(title=f"n={params.n}", xlabel="delta/v", ylabel="T / T_max")
    plot.line(grid, sweep.T_fwd_norm, label="forward")
    plot.line(grid, sweep.T_bwd_norm, label="backward")
    run.plot("transmission.svg", plot)
    plot = Plot(title=f"n={params.n}", xlabel="delta/v", ylabel="T_fwd / T_bwd", logy=True)
    plot.line(grid, sweep.ratio_analytic, label="analytic")
    plot.scatter(grid, sweep.ratio_numeric, label="numeric")
    run.plot("ratio.svg", plot)
    rep = scattering.report(params)
    run.json("report.json", vars(rep))
    finite = np.isfinite(sweep.ratio_analytic) & (sweep.ratio_analytic > 0)
    rel = np.abs(sweep.ratio_numeric[finite] / sweep.ratio_analytic[finite] - 1)
    summary = {
        "report": vars(rep),
        "ratio_max_relative_error": float(rel.max()) if rel.size else None,
        "T_fwd_peak_delta_over_v": float(grid[np.argmax(sweep.T_fwd)]),
        "T_bwd_peak_delta_over_v": float(grid[np.argmax(sweep.T_bwd)]),
        "max_T": float(max(sweep.T_fwd.max(), sweep.T_bwd.max())),
    }
    return params, summary


def optimize_plots(run: Run, records) -> None:
    ns = [r.n for r in records]
    for name, attr, label in (
        ("optimize_T.svg", "T_max", "T_max"),
        ("optimize_L.svg", "insertion_loss_db", "L (dB)"),
        ("optimize_contrast.svg", "contrast_percent", "contrast (%)"),
        ("optimize_ratios.svg", None, "optimal ratio"),
    ):
        plot = Plot(title="optimized forward transmission", xlabel="n", ylabel=label)
        if attr is None:
            plot.line(ns, [r.w_over_v_opt for r in records], label="|w/v|")
            plot.line(ns, [r.v_over_gamma_opt for r in records], label="|v/gamma|")
        else:
            plot.line(ns, [getattr(r, attr) for r in records], label=label)
        run.plot(name, plot)


def cmd_optimize(cfg: RunConfig, run: Run):
    opts = cfg.optimize
    records = optimize.sweep_n(opts.n_min, opts.n_max, opts.tolerance, run.threads, gamma=opts.gamma)
    run.table("optimum", io.optimum_columns(records))
    optimize_plots(run, records)
    summary = {"records": [r.to_dict() for r in records]}
    if len(records) >= 3:
        summary["plateau"] = vars(optimize.plateau_check(records))
    return None, summary


def cmd_reproduce(figure: str, run: Run):
    if figure == "fig4":
        checks, data = reproduce.fig4_checks(run.threads)
        records = data["records"]
        run.table("optimum", io.optimum_columns(records))
        optimize_plots(run, records)
        for profile in (False, True):
            sl = optimize.conditional_slices(records[-1], profile=profile)
            tag = "profile" if profile else "fixed"
            run.table(f"slices_{tag}", sl)
            for axis, x, f in (("w", "w_over_v", "T_fwd_vs_w"), ("v", "v_over_gamma", "T_fwd_vs_v")):
                plot = Plot(title=f"n=20, other ratio {tag}", xlabel=x, ylabel="T_fwd")
                plot.line(sl[x], sl[f])
                run.plot(f"slice_{axis}_{tag}.svg", plot)
        extra = {"plateau": vars(data["plateau"])}
    elif figure == "fig3":
        checks, data = reproduce.fig3_checks()
        for side, key in (("left", "forward"), ("right", "backward")):
            traj = data[key]
            run.table(f"trajectory_{side}", io.trajectory_columns(traj))
            run.table(f"snapshot_{side}", io.snapshot_columns(dynamics.snapshot(traj, 60.0)))
            run.plot(f"dynamics_{side}.svg", trajectory_plot(traj, f"launch {side}"))
        run.table("sweep", data["sweep"].columns())
        extra = {"params": data["params"].to_dict()}
    else:
        checks, data = reproduce.fig2_checks()
        extra = {}
        for r, (p, spec, wr, loc) in data.items():
            tag = {1.0: "pos", -1.0: "neg", 0.0: "zero"}[r]
            locus = spectral.pbc_locus(p, 512)
            run.table(f"obc_spectrum_{tag}", io.spectrum_columns(spec))
            run.table(f"pbc_locus_{tag}", io.locus_columns(locus))
            run.table(f"profiles_{tag}", io.profile_columns(spec))
            run.plot(f"spectrum_{tag}.svg", spectrum_plot(spec, locus, f"delta/v={r:g}"))
            extra[tag] = {"W": wr.winding, "raw_phase": wr.raw_phase, "localization": loc.verdict.value}
    report = {"figure": figure, "checks": [c.to_dict() for c in checks],
              "passed": all(c.passed for c in checks), **extra}
    run.json("report.json", report)
    for c in checks:
        print(c.line())
    return report


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _ratio(params):
    return f"{params.delta / params.v:g}" if params.v else "n/a"


def _n_range(text: str):
    try:
        lo, _, hi = text.partition(":")
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or NMIN:NMAX, got {text!r}") from None
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (created)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps, 0 = auto")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")

    parser = argparse.ArgumentParser(prog="nhskin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("spectrum", "OBC spectrum, PBC locus and mode profiles"),
        ("winding", "point-gap winding number"),
        ("dynamics", "time evolution from an edge-launched state"),
        ("scattering", "transmission sweep over delta/v"),
    ):
        sub.add_parser(name, parents=[common], help=text)
    opt = sub.add_parser("optimize", parents=[common], help="maximize forward transmission vs n")
    opt.add_argument("--n", type=_n_range, help="chain lengths, e.g. 2:20")
    rep = sub.add_parser("reproduce", parents=[common], help="canned figure run with checks")
    rep.add_argument("figure", choices=sorted(reproduce.FIGURES))
    return parser


COMMANDS = {
    "spectrum": cmd_spectrum,
    "winding": cmd_winding,
    "dynamics": cmd_dynamics,
    "scattering": cmd_scattering,
    "optimize": cmd_optimize,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 0:
            raise ConfigError("--threads: must be >= 0")
        threads = args.threads or os.cpu_count() or 1
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        if getattr(args, "n", None):
            lo, hi = args.n
            if not 2 <= lo <= hi <= 64:
                raise ConfigError("--n: need 2 <= NMIN <= NMAX <= 64")
            cfg.optimize.n_min, cfg.optimize.n_max = lo, hi
        run = Run(args.out, args.format, threads)
        if args.command == "reproduce":
            report = cmd_reproduce(args.figure, run)
            run.metadata(f"reproduce {args.figure}", {"figure": args.figure}, {"passed": report["passed"]})
            return EXIT_OK if report["passed"] else EXIT_REPRODUCE
        params, summary = COMMANDS[args.command](cfg, run)
        run.metadata(args.command, cfg.resolved(args.command, params), summary)
    except NumericalError as exc:
        print(f"nhskin: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        print(f"nhskin: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # ConfigError and parameter validation failures alike
        print(f"nhskin: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
