"""Strict run configuration.

A config file is one JSON object with an optional ``model`` block and one
optional block per subcommand.  Unknown keys anywhere are rejected and every
error message names the offending field by its dotted path.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import Boundary, ChainParams


# ---------------------------------------------------------------------------
# field coercion
# ---------------------------------------------------------------------------


def _real(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a real number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    return float(value)


def _int(value, path, low=None, high=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if low is not None and value < low:
        raise ConfigError(f"{path}: must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ConfigError(f"{path}: must be <= {high}, got {value}")
    return value


def _complex(value, path):
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(f"{path}: complex values are [re, im] pairs")
        return complex(_real(value[0], f"{path}[0]"), _real(value[1], f"{path}[1]"))
    return complex(_real(value, path))


def _choice(value, path, options):
    if value not in options:
        raise ConfigError(f"{path}: expected one of {sorted(options)}, got {value!r}")
    return value


def _bool(value, path):
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true or false, got {value!r}")
    return value


def _object(value, path, allowed):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object")
    extra = sorted(set(value) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}: unknown key")
    return value


def _grid(value, path):
    """``[x, ...]`` or ``{"start", "stop", "num"}`` (inclusive linspace)."""
    if isinstance(value, list):
        if not value:
            raise ConfigError(f"{path}: grid is empty")
        return [_real(x, f"{path}[{i}]") for i, x in enumerate(value)]
    obj = _object(value, path, ("start", "stop", "num"))
    for key in ("start", "stop", "num"):
        if key not in obj:
            raise ConfigError(f"{path}.{key}: missing")
    start = _real(obj["start"], f"{path}.start")
    stop = _real(obj["stop"], f"{path}.stop")
    num = _int(obj["num"], f"{path}.num", low=1)
    return np.linspace(start, stop, num).tolist()


# ---------------------------------------------------------------------------
# model block
# ---------------------------------------------------------------------------

MODEL_KEYS = (
    "n", "delta", "delta_over_v", "v", "w", "w_over_v",
    "w1", "w2", "u1", "u2", "gamma", "v_over_gamma", "bc",
)


def parse_model(raw, path="model") -> ChainParams:
    """Build :class:`ChainParams` from a model block.

    Couplings are given either as the reducible shortcut ``w`` /
    ``w_over_v`` or explicitly as ``w1, w2, u1, u2``.  ``delta_over_v`` and
    ``v_over_gamma`` may replace ``delta`` and ``gamma``.
    """
    obj = _object(raw, path, MODEL_KEYS)
    for key in ("n", "v"):
        if key not in obj:
            raise ConfigError(f"{path}.{key}: missing")
    n = _int(obj["n"], f"{path}.n", low=1)
    v = _real(obj["v"], f"{path}.v")

    def exclusive(a, b):
        if a in obj and b in obj:
            raise ConfigError(f"{path}.{b}: conflicts with {path}.{a}")

    exclusive("delta", "delta_over_v")
    if "delta_over_v" in obj:
        delta = _real(obj["delta_over_v"], f"{path}.delta_over_v") * v
    else:
        delta = _real(obj.get("delta", 0.0), f"{path}.delta")

    explicit = [k for k in ("w1", "w2", "u1", "u2") if k in obj]
    exclusive("w", "w_over_v")
    for short in ("w", "w_over_v"):
        if short in obj and explicit:
            raise ConfigError(f"{path}.{explicit[0]}: conflicts with {path}.{short}")
    if "w" in obj or "w_over_v" in obj:
        if "w" in obj:
            w = _real(obj["w"], f"{path}.w")
        else:
            w = abs(_real(obj["w_over_v"], f"{path}.w_over_v") * v)
        couplings = (w, w, 1j * w, -1j * w)
    else:
        couplings = tuple(_complex(obj.get(k, 0.0), f"{path}.{k}") for k in ("w1", "w2", "u1", "u2"))

    exclusive("gamma", "v_over_gamma")
    if "v_over_gamma" in obj:
        ratio = _real(obj["v_over_gamma"], f"{path}.v_over_gamma")
        if ratio == 0 or v / ratio < 0:
            raise ConfigError(f"{path}.v_over_gamma: implies a negative or undefined gamma")
        gamma = v / ratio
    else:
        gamma = _real(obj.get("gamma", 0.0), f"{path}.gamma")
        if gamma < 0:
            raise ConfigError(f"{path}.gamma: must be >= 0")
    bc = _choice(obj.get("bc", "OBC"), f"{path}.bc", {"OBC", "PBC"})
    return ChainParams(n, delta, v, *couplings, gamma, Boundary(bc))


# ---------------------------------------------------------------------------
# command blocks
# ---------------------------------------------------------------------------


@dataclass
class SpectrumOptions:
    k_samples: int = 512
    sweep: list | None = None  # delta/v grid for the real/imaginary sweep


@dataclass
class WindingOptions:
    k_samples: int = 1024
    base_point: list | None = None  # [re, im]; automatic when null


@dataclass
class DynamicsOptions:
    t_max: float = 60.0
    dt_out: float = 0.1
    launch: str = "both"
    phase: float | None = None
    method: str = "expm"
    include_ports: bool = False


@dataclass
class ScatteringOptions:
    delta_over_v: list = field(default_factory=lambda: np.linspace(-1.5, 1.5, 61).tolist())


@dataclass
class OptimizeOptions:
    n_min: int = 2
    n_max: int = 20
    tolerance: float = 1e-6
    gamma: float = 0.1


def _spectrum(raw, path):
    obj = _object(raw, path, ("k_samples", "sweep"))
    out = SpectrumOptions()
    if "k_samples" in obj:
        out.k_samples = _int(obj["k_samples"], f"{path}.k_samples", low=16)
    if obj.get("sweep") is not None:
        out.sweep = _grid(obj["sweep"], f"{path}.sweep")
    return out


def _winding(raw, path):
    obj = _object(raw, path, ("k_samples", "base_point"))
    out = WindingOptions()
    if "k_samples" in obj:
        out.k_samples = _int(obj["k_samples"], f"{path}.k_samples", low=64)
    if obj.get("base_point") is not None:
        z = _complex(obj["base_point"], f"{path}.base_point")
        out.base_point = [z.real, z.imag]
    return out


def _dynamics(raw, path):
    keys = ("t_max", "dt_out", "launch", "phase", "method", "include_ports")
    obj = _object(raw, path, keys)
    out = DynamicsOptions()
    for key in ("t_max", "dt_out"):
        if key in obj:
            val = _real(obj[key], f"{path}.{key}")
            if val <= 0:
                raise ConfigError(f"{path}.{key}: must be positive")
            setattr(out, key, val)
    if "launch" in obj:
        out.launch = _choice(obj["launch"], f"{path}.launch", {"left", "right", "both"})
    if obj.get("phase") is not None:
        out.phase = _real(obj["phase"], f"{path}.phase")
    if "method" in obj:
        out.method = _choice(obj["method"], f"{path}.method", {"expm", "rk45"})
    if "include_ports" in obj:
        out.include_ports = _bool(obj["include_ports"], f"{path}.include_ports")
    return out


def _scattering(raw, path):
    obj = _object(raw, path, ("delta_over_v",))
    out = ScatteringOptions()
    if "delta_over_v" in obj:
        out.delta_over_v = _grid(obj["delta_over_v"], f"{path}.delta_over_v")
    return out


def _optimize(raw, path):
    obj = _object(raw, path, ("n_min", "n_max", "tolerance", "gamma"))
    out = OptimizeOptions()
    if "n_min" in obj:
        out.n_min = _int(obj["n_min"], f"{path}.n_min", 2, 64)
    if "n_max" in obj:
        out.n_max = _int(obj["n_max"], f"{path}.n_max", 2, 64)
    if out.n_min > out.n_max:
        raise ConfigError(f"{path}.n_max: must be >= n_min")
    if "tolerance" in obj:
        out.tolerance = _real(obj["tolerance"], f"{path}.tolerance")
        if out.tolerance <= 0:
            raise ConfigError(f"{path}.tolerance: must be positive")
    if "gamma" in obj:
        out.gamma = _real(obj["gamma"], f"{path}.gamma")
        if out.gamma <= 0:
            raise ConfigError(f"{path}.gamma: must be positive")
    return out


BLOCKS = {
    "spectrum": _spectrum,
    "winding": _winding,
    "dynamics": _dynamics,
    "scattering": _scattering,
    "optimize": _optimize,
}


@dataclass
class RunConfig:
    model: ChainParams | None = None
    spectrum: SpectrumOptions = field(default_factory=SpectrumOptions)
    winding: WindingOptions = field(default_factory=WindingOptions)
    dynamics: DynamicsOptions = field(default_factory=DynamicsOptions)
    scattering: ScatteringOptions = field(default_factory=ScatteringOptions)
    optimize: OptimizeOptions = field(default_factory=OptimizeOptions)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        obj = _object(raw, "config", ("model", *BLOCKS))
        cfg = cls()
        if "model" in obj:
            cfg.model = parse_model(obj["model"])
        for name, parse in BLOCKS.items():
            if name in obj:
                setattr(cfg, name, parse(obj[name], name))
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
        try:
            raw = json.loads(text, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(raw)

    def resolved(self, command: str, params: ChainParams | None) -> dict:
        """The fully defaulted configuration relevant to ``command``."""
        out = {"model": params.to_dict() if params is not None else None}
        if command in BLOCKS:
            out[command] = asdict(getattr(self, command))
        return out


def _reject_constant(name):
    raise ConfigError(f"config: {name} is not allowed")


# ---------------------------------------------------------------------------
# canned parameter sets
# ---------------------------------------------------------------------------

FIG3_GAMMA = 0.1


def fig2_params(delta_over_v: float = 1.0, n: int = 10) -> ChainParams:
    """``v = -1``, ``|w/v| = 1``, OBC."""
    return ChainParams.from_ratios(n, delta_over_v, -1.0, 1.0)


def fig3_params(delta_over_v: float = -1.0, n: int = 5) -> ChainParams:
    """``v/gamma = -1``, ``|w/v| = 1/2``, ``gamma = 0.1``."""
    v = -FIG3_GAMMA
    return ChainParams.from_ratios(n, delta_over_v, v, 0.5, gamma=FIG3_GAMMA)
