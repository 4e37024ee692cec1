import json

import numpy as np
import pytest

from nhskin.config import RunConfig, fig2_params, fig3_params, parse_model
from nhskin.errors import ConfigError
from nhskin.model import Boundary


def test_minimal_model():
    p = parse_model({"n": 4, "v": -0.5})
    assert (p.n, p.delta, p.v, p.gamma, p.bc) == (4, 0.0, -0.5, 0.0, Boundary.OBC)
    assert p.w1 == p.w2 == p.u1 == p.u2 == 0


def test_ratio_shortcuts():
    p = parse_model({"n": 5, "v": -0.1, "delta_over_v": -1, "w_over_v": 0.5, "v_over_gamma": -1})
    assert p == fig3_params()
    assert p.is_ssh_reducible


def test_explicit_complex_couplings():
    p = parse_model({"n": 3, "v": 0, "w1": [1, 2], "u2": 0.5, "bc": "PBC"})
    assert p.w1 == 1 + 2j and p.u2 == 0.5 and p.w2 == 0 and p.bc is Boundary.PBC


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"n": 3, "v": 0, "dleta": 1}, "model.dleta"),
        ({"n": 3}, "model.v"),
        ({"v": 0}, "model.n"),
        ({"n": 0, "v": 0}, "model.n"),
        ({"n": 2.5, "v": 0}, "model.n"),
        ({"n": 3, "v": "x"}, "model.v"),
        ({"n": 3, "v": 0, "delta": 1, "delta_over_v": 1}, "model.delta_over_v"),
        ({"n": 3, "v": 0, "w": 1, "w_over_v": 1}, "model.w_over_v"),
        ({"n": 3, "v": 0, "w": 1, "u1": 1}, "model.u1"),
        ({"n": 3, "v": 0, "gamma": 1, "v_over_gamma": 1}, "model.v_over_gamma"),
        ({"n": 3, "v": -1, "v_over_gamma": 1}, "model.v_over_gamma"),
        ({"n": 3, "v": 0, "gamma": -1}, "model.gamma"),
        ({"n": 3, "v": 0, "w1": [1, 2, 3]}, "model.w1"),
        ({"n": 3, "v": 0, "bc": "open"}, "model.bc"),
        ({"n": 3, "v": True}, "model.v"),
    ],
)
def test_model_errors_name_field(raw, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        parse_model(raw)


def test_config_error_is_value_error():
    assert issubclass(ConfigError, ValueError)


def test_defaults():
    cfg = RunConfig.from_dict({})
    assert cfg.model is None
    assert cfg.spectrum.k_samples == 512 and cfg.winding.base_point is None
    assert cfg.dynamics.t_max == 60.0 and cfg.dynamics.launch == "both"
    assert len(cfg.scattering.delta_over_v) == 61
    assert (cfg.optimize.n_min, cfg.optimize.n_max, cfg.optimize.gamma) == (2, 20, 0.1)


def test_grids():
    cfg = RunConfig.from_dict({"scattering": {"delta_over_v": {"start": -1, "stop": 1, "num": 5}},
                               "spectrum": {"sweep": [0.0, 0.5]}})
    assert cfg.scattering.delta_over_v == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert cfg.spectrum.sweep == [0.0, 0.5]
    for bad, field in [({"start": 0, "stop": 1}, "num"), ([], "delta_over_v"), ({"start": 0, "stop": 1, "num": 0}, "num")]:
        with pytest.raises(ConfigError, match=field):
            RunConfig.from_dict({"scattering": {"delta_over_v": bad}})


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"dynamics": {"launch": "top"}}, "dynamics.launch"),
        ({"dynamics": {"t_max": 0}}, "dynamics.t_max"),
        ({"dynamics": {"method": "euler"}}, "dynamics.method"),
        ({"dynamics": {"include_ports": 1}}, "dynamics.include_ports"),
        ({"winding": {"k_samples": 8}}, "winding.k_samples"),
        ({"optimize": {"n_min": 10, "n_max": 4}}, "optimize.n_max"),
        ({"optimize": {"n_max": 100}}, "optimize.n_max"),
        ({"optimize": {"tolerance": -1}}, "optimize.tolerance"),
        ({"spectrum": {"extra": 1}}, "spectrum.extra"),
        ({"plot": {}}, "config.plot"),
    ],
)
def test_block_errors_name_field(raw, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        RunConfig.from_dict(raw)


def test_base_point_forms():
    assert RunConfig.from_dict({"winding": {"base_point": [0.5, -1]}}).winding.base_point == [0.5, -1.0]
    assert RunConfig.from_dict({"winding": {"base_point": 2}}).winding.base_point == [2.0, 0.0]


def test_load_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model": {"n": 6, "v": -1, "w_over_v": 1, "delta_over_v": 1}}))
    assert RunConfig.load(path).model == fig2_params(1.0, n=6)


@pytest.mark.parametrize("text, match", [("{", "line 1"), ('{"model": {"n": 3, "v": NaN}}', "NaN"),
                                         ('{"model": {"n": 3, "v": Infinity}}', "Infinity")])
def test_load_rejects_bad_json(tmp_path, text, match):
    path = tmp_path / "c.json"
    path.write_text(text)
    with pytest.raises(ConfigError, match=match):
        RunConfig.load(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.load(tmp_path / "nope.json")


def test_resolved_is_complete():
    cfg = RunConfig.from_dict({"dynamics": {"t_max": 10}})
    out = cfg.resolved("dynamics", fig3_params())
    assert out["dynamics"]["t_max"] == 10 and out["dynamics"]["dt_out"] == 0.1
    assert out["model"]["n"] == 5


def test_presets():
    p = fig2_params()
    assert (p.v, p.delta, p.w, p.n) == (-1.0, -1.0, 1.0, 10)
    q = fig3_params()
    assert q.gamma == 0.1 and q.v == -0.1 and q.delta == pytest.approx(0.1) and q.w == pytest.approx(0.05)
    assert np.isclose(q.v / q.gamma, -1)
