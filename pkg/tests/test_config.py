from dataclasses import replace

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from galvanic_tec.config import (
    RunConfig,
    config_from_dict,
    config_to_dict,
    dump_config,
    parse_config,
    with_frequency,
    with_sweep,
)
from galvanic_tec.errors import ParseError, ValidationError


def test_empty_file_gives_baseline(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    cfg = parse_config(p)
    assert cfg.table == "human_forearm"
    assert [(ls.name, ls.thickness_mm) for ls in cfg.layers] == [
        ("skin", 1.0),
        ("fat", 7.0),
        ("muscle", 15.0),
        ("cortical_bone", 20.0),
    ]
    g = cfg.channel_geometry()
    assert (g.d, g.e_st, g.e_sr, g.delta_l) == pytest.approx((0.1, 0.05, 0.05, 0.0))
    e = cfg.electrode_config()
    assert e.e_l == pytest.approx(0.01) and e.a_e == pytest.approx(1e-4)
    assert (e.m, e.m_prime) == (-1.15, -0.81)
    assert all(lay.f_w == 0.7 for lay in cfg.stack())
    assert cfg.paths == ("S-S", "S-M", "M-S", "M-M")
    assert cfg.safety.drive_current_a == 1e-3
    assert cfg == parse_config()


def test_negative_thickness_names_field():
    with pytest.raises(ValidationError) as ei:
        config_from_dict({"layers": [{"name": "skin", "thickness_mm": -1}, {"name": "fat"}]})
    assert ei.value.field == "layers[0].thickness_mm"


def test_override_changes_only_d():
    base = parse_config()
    cfg = parse_config(overrides=["geometry.d_mm=50"])
    assert cfg.geometry.d_mm == 50.0
    assert replace(cfg, geometry=base.geometry) == base


@pytest.mark.parametrize(
    "data,field",
    [
        ({"geometri": {}}, "geometri"),
        ({"geometry": {"d_cm": 5}}, "geometry.d_cm"),
        ({"electrode": {"k2": 2.0}}, "electrode.k2"),
        ({"geometry": {"e_st_mm": 0}}, "geometry.e_st_mm"),
        ({"geometry": {"delta_l_mm": -1}}, "geometry.delta_l_mm"),
        ({"layers": [{"name": "skin"}, {"name": "liver"}]}, "layers[1].name"),
        ({"paths": ["S-X"]}, "paths"),
        ({"sweep": {"param": "d_mm", "start": 50, "stop": 20, "count": 3}}, "sweep.stop"),
        ({"sweep": {"param": "hue", "start": 1, "stop": 2, "count": 3}}, "sweep.param"),
        ({"frequency_hz": {"start": -1}}, "frequency_hz.start"),
        ({"output": {"plot": "yes"}}, "output.plot"),
        ({"table": "martian"}, "table"),
        ({"geometry": {"d_mm": "far"}}, "geometry.d_mm"),
    ],
)
def test_validation_names_field(data, field):
    with pytest.raises(ValidationError) as ei:
        config_from_dict(data)
    assert ei.value.field == field
    assert str(ei.value).startswith(field)


def test_path_needs_layer():
    with pytest.raises(ValidationError, match="paths"):
        config_from_dict({"layers": [{"name": "skin"}, {"name": "fat"}], "paths": ["M-M"]})


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        parse_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("geometry: {d_mm: [\n")
    with pytest.raises(ParseError):
        parse_config(bad)
    lst = tmp_path / "list.yaml"
    lst.write_text("- 1\n- 2\n")
    with pytest.raises(ParseError):
        parse_config(lst)
    with pytest.raises(ParseError):
        parse_config(overrides=["geometry.d_mm"])


def test_round_trip_text(tmp_path):
    cfg = with_sweep(parse_config(overrides=["geometry.delta_l_mm=5", "paths=[mm, ss]"]), "e_s_both=20:100:5")
    p = tmp_path / "c.yaml"
    p.write_text(dump_config(cfg))
    assert parse_config(p) == cfg


def test_sweep_units():
    cfg = with_sweep(parse_config(), "d=20:100:5")
    assert cfg.sweep.param == "d_mm"
    s = cfg.sweep_spec()
    assert s.param == "d"
    assert s.values == pytest.approx((0.02, 0.04, 0.06, 0.08, 0.1))
    f = with_sweep(parse_config(), "frequency_hz=1e5:1e6:3")
    assert f.sweep_spec().values == pytest.approx((1e5, 5.5e5, 1e6))


def test_frequency_forms():
    assert parse_config().frequency_hz.grid()[0] == pytest.approx(1e5)
    assert len(parse_config().frequency_hz.grid()) == 51
    one = with_frequency(parse_config(), "2e5")
    assert one.frequency_hz.grid() == (2e5,)
    assert one.analysis_frequency_hz == 2e5
    rng = with_frequency(parse_config(), "1e5:1e6:10")
    assert len(rng.frequency_hz.grid()) == 11
    with pytest.raises(ParseError):
        with_frequency(parse_config(), "fast")
    explicit = config_from_dict({"frequency_hz": [1e5, 2e5, 4e5]})
    assert explicit.frequency_hz.grid() == (1e5, 2e5, 4e5)
    with pytest.raises(ValidationError):
        config_from_dict({"frequency_hz": [2e5, 1e5]})


def test_porcine_defaults():
    cfg = config_from_dict({"table": "porcine_loin"})
    assert [ls.thickness_mm for ls in cfg.layers] == [2.0, 8.0, 40.0]


_mm = st.floats(min_value=1.0, max_value=200.0, allow_nan=False).map(lambda x: round(x, 3))


@settings(max_examples=60, deadline=None)
@given(
    d=_mm,
    es=_mm,
    er=_mm,
    dl=st.floats(min_value=0.0, max_value=50.0).map(lambda x: round(x, 3)),
    el=_mm,
    fat=_mm,
    paths=st.lists(st.sampled_from(["S-S", "S-M", "M-S", "M-M"]), min_size=1, max_size=4, unique=True),
    drive=st.floats(min_value=1e-6, max_value=1e-2),
    sweep=st.one_of(st.none(), st.sampled_from(["d=20:100:5", "delta_l=0:40:3", "fat_thickness=0.5:60:4"])),
)
def test_round_trip_property(d, es, er, dl, el, fat, paths, drive, sweep):
    cfg = config_from_dict(
        {
            "geometry": {"d_mm": d, "e_st_mm": es, "e_sr_mm": er, "delta_l_mm": dl},
            "electrode": {"e_l_mm": el},
            "layers": [
                {"name": "skin", "thickness_mm": 1},
                {"name": "fat", "thickness_mm": fat},
                {"name": "muscle", "thickness_mm": 15},
            ],
            "paths": paths,
            "safety": {"drive_current_a": drive},
        }
    )
    if sweep:
        cfg = with_sweep(cfg, sweep)
    again = config_from_dict(yaml.safe_load(dump_config(cfg)))
    assert again == cfg
    assert config_to_dict(again) == config_to_dict(cfg)


def test_direct_construction_defaults():
    # the dataclass alone carries the unit-suffixed baseline values
    cfg = RunConfig()
    assert cfg.geometry.d_mm == 100.0 and cfg.electrode.e_l_mm == 10.0
