"""CSV/JSON table writers and readers.

CSV dialect: comma separated, header row, LF endings, UTF-8, no quoting.
Floats are written with ``repr`` so they read back bit-identically; infinite
values are the literal ``inf``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def _parse(s: str):
    if s == "true":
        return True
    if s == "false":
        return False
    try:
        return int(s)
    except ValueError:
        return float(s)


def write_csv(path, columns: dict) -> Path:
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[c]).ravel() for c in names]
    rows = len(data[0]) if data else 0
    if any(len(d) != rows for d in data):
        raise ValueError("all columns must have the same length")
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_NONE)
        w.writerow(names)
        for i in range(rows):
            w.writerow([_fmt(d[i]) for d in data])
    return path


def read_csv(path) -> dict:
    """Columns as numpy arrays (int, float or bool dtype per column)."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        rows = [[_parse(s) for s in row] for row in reader]
    cols = list(zip(*rows)) if rows else [()] * len(names)
    return {name: np.array(col) for name, col in zip(names, cols)}


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def unjson_float(x):
    if x in ("inf", "-inf", "nan"):
        return float(x)
    return x


def write_json(path, obj) -> Path:
    path = Path(path)
    text = json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_table(path_stem, columns: dict, fmt: str = "csv") -> Path:
    """Write ``columns`` as ``<stem>.csv`` or ``<stem>.json``."""
    stem = Path(path_stem)
    if fmt == "csv":
        return write_csv(stem.with_suffix(".csv"), columns)
    if fmt == "json":
        return write_json(stem.with_suffix(".json"), {k: np.asarray(v) for k, v in columns.items()})
    raise ValueError(f"unknown format {fmt!r}")


def read_table(path) -> dict:
    path = Path(path)
    if path.suffix == ".csv":
        return read_csv(path)
    data = read_json(path)
    return {k: np.array([unjson_float(x) for x in v]) for k, v in data.items()}


# ---------------------------------------------------------------------------
# structure-specific schemas
# ---------------------------------------------------------------------------


def spectrum_columns(spectrum) -> dict:
    e = spectrum.eigenvalues
    return {
        "index": np.arange(len(e)),
        "re_E": e.real,
        "im_E": e.imag,
        "residual": spectrum.residuals,
    }


def profile_columns(spectrum) -> dict:
    m, n = spectrum.profiles.shape
    modes, units = np.meshgrid(np.arange(m), np.arange(1, n + 1), indexing="ij")
    return {
        "mode_index": modes.ravel(),
        "unit": units.ravel(),
        "population": spectrum.profiles.ravel(),
    }


def spectrum_from_tables(spec_cols: dict, profile_cols: dict):
    """Rebuild a :class:`~nhskin.spectral.SpectrumResult` (without eigenvectors)."""
    from .spectral import SpectrumResult

    e = spec_cols["re_E"] + 1j * spec_cols["im_E"]
    m = int(profile_cols["mode_index"].max()) + 1
    n = int(profile_cols["unit"].max())
    prof = np.zeros((m, n))
    prof[profile_cols["mode_index"], profile_cols["unit"] - 1] = profile_cols["population"]
    return SpectrumResult(e, np.empty((0, 0)), np.asarray(spec_cols["residual"], float), prof)


def locus_columns(locus) -> dict:
    b = locus.bands
    return {
        "k": locus.k,
        "re_E1": b[:, 0].real,
        "im_E1": b[:, 0].imag,
        "re_E2": b[:, 1].real,
        "im_E2": b[:, 1].imag,
    }


def locus_from_table(cols: dict):
    from .spectral import PBCLocus

    bands = np.stack(
        [cols["re_E1"] + 1j * cols["im_E1"], cols["re_E2"] + 1j * cols["im_E2"]], axis=1
    )
    return PBCLocus(np.asarray(cols["k"], float), bands)


def trajectory_columns(traj) -> dict:
    occ = traj.occupations
    cols = {"t": traj.times}
    for j in range(traj.n):
        cols[f"occ_a_{j + 1}"] = occ[:, 2 * j]
        cols[f"occ_b_{j + 1}"] = occ[:, 2 * j + 1]
    return cols


def occupations_from_table(cols: dict):
    """``(times, occupations)`` with occupations in flat mode order."""
    n = sum(1 for c in cols if c.startswith("occ_a_"))
    occ = np.empty((len(cols["t"]), 2 * n))
    for j in range(n):
        occ[:, 2 * j] = cols[f"occ_a_{j + 1}"]
        occ[:, 2 * j + 1] = cols[f"occ_b_{j + 1}"]
    return np.asarray(cols["t"], float), occ


def snapshot_columns(snap) -> dict:
    units, a, b = zip(*snap)
    return {"unit": np.array(units), "occ_a": np.array(a), "occ_b": np.array(b)}


def sweep_from_table(cols: dict):
    from .scattering import SweepTable

    return SweepTable(**{c: np.asarray(cols[c], float) for c in SweepTable.COLUMNS})


OPTIMUM_COLUMNS = ("n", "w_over_v_opt", "v_over_gamma_opt", "T_max", "L_db", "contrast_percent", "converged")


def optimum_columns(records) -> dict:
    return {
        "n": [r.n for r in records],
        "w_over_v_opt": [r.w_over_v_opt for r in records],
        "v_over_gamma_opt": [r.v_over_gamma_opt for r in records],
        "T_max": [r.T_max for r in records],
        "L_db": [r.insertion_loss_db for r in records],
        "contrast_percent": [r.contrast_percent for r in records],
        "converged": [r.converged for r in records],
    }


def optimum_from_table(cols: dict):
    """Records rebuilt from the results table; ``T_bwd`` and diagnostics are not stored."""
    from .optimize import OptimumRecord

    out = []
    for i in range(len(cols["n"])):
        out.append(
            OptimumRecord(
                n=int(cols["n"][i]),
                w_over_v_opt=float(cols["w_over_v_opt"][i]),
                v_over_gamma_opt=float(cols["v_over_gamma_opt"][i]),
                T_max=float(cols["T_max"][i]),
                T_bwd=float("nan"),
                insertion_loss_db=float(cols["L_db"][i]),
                contrast_percent=float(cols["contrast_percent"][i]),
                converged=bool(cols["converged"][i]),
            )
        )
    return out
