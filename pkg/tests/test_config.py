import dataclasses
import json

import pytest

from rackcasimir.config import ConfigError, NumericsBlock, config_to_dict, parse_config, schema
from rackcasimir.force import Numerics
from rackcasimir.geometry import ProfileGeometry, RackGeometry
from rackcasimir.stress import StressConfig

QUICK = {"sweep": {"v_list": None, "s_grid": [0.0]}}


def test_defaults_are_the_reference_run():
    cfg = parse_config({})
    assert cfg.geometry == RackGeometry()
    assert cfg.sweep.v_list == (0.5, 0.4, 0.3)
    assert len(cfg.sweep.s_grid) == 21
    assert cfg.physics.dimensionality == ("2d",)


@pytest.mark.parametrize(
    "data",
    [
        {"extra": {}},
        {"geometry": {"w": 1}},
        {"physics": {"temperature": 0}},
        {"numerics": {"h": 0.1}},
        {"sweep": {"s_grid": {"start": 0, "stop": 2, "num": 3}}},
        {"output": {"format": "png"}},
    ],
)
def test_unknown_keys_rejected(data):
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(data)


@pytest.mark.parametrize(
    "data,match",
    [
        ({"geometry": {"l": 0}}, "l must be positive"),
        ({"numerics": {"target_element_size": 0.6}}, "shortest profile edge"),
        ({"physics": {"dimensionality": "4d"}}, "dimensionality"),
        ({"physics": {"mass": -1}}, "mass"),
        ({"sweep": {"s_grid": [0.0, 2.5]}}, r"\[0, a\)"),
        ({"sweep": {"s_grid": [1.0, 0.5]}}, "increasing"),
        ({"numerics": {"basis_degree": 1.5}}, "integer"),
        ({"numerics": {"x0": 0.01}}, "element length"),
        ({"geometry": {"v": "wide"}}, "number"),
    ],
)
def test_invalid_configs(data, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(data)


def test_range_grid_excludes_stop():
    cfg = parse_config({"sweep": {"s_grid": {"start": 0, "stop": 2, "count": 4}}})
    assert cfg.sweep.s_grid == (0.0, 0.5, 1.0, 1.5)


def test_explicit_vertices():
    data = {
        "geometry": {"vertices": [[0, 0], [0, 0.5], [-0.5, 1.0], [-0.5, 1.5], [0, 2]], "a": 2, "center": [0.5, 0.25]},
        **QUICK,
    }
    cfg = parse_config(data)
    assert isinstance(cfg.geometry, ProfileGeometry)
    assert cfg.geometries() == [cfg.geometry]
    with pytest.raises(ConfigError):
        parse_config({"geometry": {"vertices": [[0, 0], [0, 2]], "a": 2}})


def test_every_numeric_knob_reachable():
    block = {f.name for f in dataclasses.fields(NumericsBlock)}
    knobs = {f.name for f in dataclasses.fields(Numerics)}
    knobs |= {f.name for f in dataclasses.fields(StressConfig)} - {"dimensionality", "mass"}
    assert knobs <= block
    sch = schema()
    assert set(sch["numerics"]) == block
    assert all(entry["description"] for blk in sch.values() for entry in blk.values())


def test_round_trip():
    cfg = parse_config({"physics": {"dimensionality": ["3d", "2d"], "mass": 1.0}, **QUICK})
    again = parse_config(json.loads(json.dumps(config_to_dict(cfg))))
    assert again == cfg
    assert again.physics.dimensionality == ("2d", "3d")
