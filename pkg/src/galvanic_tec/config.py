"""Run configuration: YAML with unit-suffixed keys, resolved against a tissue table.

Every length in the file is in millimetres and every key names its unit.
Unknown keys are rejected, because a typo in a physical parameter would
otherwise fall back to a default without notice.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Iterable, Mapping

import yaml

from .dielectrics import TissueLayer, TissueTable, load_tissue_table
from .errors import ConfigError, ParseError, ValidationError
from .impedance import ChannelGeometry, ElectrodeConfig
from .network import DRIVE_CURRENT, placement
from .safety import CONTACT_CURRENT_LIMIT, ICNIRP_DENSITY_LIMIT
from .sweeps import ALL_PATHS, BASE_FREQUENCY, PARAMS, SweepSpec, log_grid, path_key

MM = 1e-3
SWEEP_KEYS = {
    "frequency_hz": ("frequency", 1.0),
    "fat_thickness_mm": ("fat_thickness", MM),
    "muscle_thickness_mm": ("muscle_thickness", MM),
    "d_mm": ("d", MM),
    "e_s_both_mm": ("e_s_both", MM),
    "delta_l_mm": ("delta_l", MM),
    "e_l_mm": ("e_l", MM),
}


def sweep_key(param: str) -> str:
    """Config key (with unit) for a sweep parameter; accepts either form."""
    if param in SWEEP_KEYS:
        return param
    for key, (name, _) in SWEEP_KEYS.items():
        if name == param:
            return key
    raise ConfigError(f"unknown sweep parameter {param!r}; expected one of {list(SWEEP_KEYS)}")


@dataclass(frozen=True)
class LayerSpec:
    name: str
    thickness_mm: float


@dataclass(frozen=True)
class GeometrySettings:
    d_mm: float = 100.0
    e_st_mm: float = 50.0
    e_sr_mm: float = 50.0
    delta_l_mm: float = 0.0


@dataclass(frozen=True)
class ElectrodeSettings:
    e_l_mm: float = 10.0
    a_e_mm2: float | None = None
    k1: float = ElectrodeConfig.k1
    k2: float = ElectrodeConfig.k2
    m: float = ElectrodeConfig.m
    m_prime: float = ElectrodeConfig.m_prime


@dataclass(frozen=True)
class FrequencySettings:
    """Either an explicit value list or a log grid from start to stop."""

    start: float = 1e5
    stop: float = 1e6
    points_per_decade: int = 50
    values: tuple | None = None

    def grid(self) -> tuple[float, ...]:
        if self.values is not None:
            return tuple(self.values)
        if self.start == self.stop:
            return (float(self.start),)
        return log_grid(self.start, self.stop, self.points_per_decade)


@dataclass(frozen=True)
class SweepSettings:
    param: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def values(self) -> tuple[float, ...]:
        """Grid in SI units."""
        _, scale = SWEEP_KEYS[self.param]
        if self.count == 1:
            raw = [self.start]
        elif self.spacing == "log":
            raw = [self.start * (self.stop / self.start) ** (i / (self.count - 1)) for i in range(self.count)]
        else:
            step = (self.stop - self.start) / (self.count - 1)
            raw = [self.start + i * step for i in range(self.count)]
        return tuple(v * scale for v in raw)


@dataclass(frozen=True)
class SafetySettings:
    drive_current_a: float = DRIVE_CURRENT
    contact_limit_a: float = CONTACT_CURRENT_LIMIT
    density_limit_a_per_m2: float = ICNIRP_DENSITY_LIMIT


@dataclass(frozen=True)
class OutputSettings:
    dir: str = "out"
    plot: bool = False
    strict: bool = False


@dataclass(frozen=True)
class RunConfig:
    table: str = "human_forearm"
    layers: tuple = ()
    geometry: GeometrySettings = field(default_factory=GeometrySettings)
    electrode: ElectrodeSettings = field(default_factory=ElectrodeSettings)
    paths: tuple = ALL_PATHS
    frequency_hz: FrequencySettings = field(default_factory=FrequencySettings)
    analysis_frequency_hz: float = BASE_FREQUENCY
    sweep: SweepSettings | None = None
    safety: SafetySettings = field(default_factory=SafetySettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    # ---- resolved model objects ------------------------------------------

    def tissue_table(self) -> TissueTable:
        return load_tissue_table(self.table)

    def stack(self, table: TissueTable | None = None) -> list[TissueLayer]:
        table = table or self.tissue_table()
        return [table[ls.name].with_thickness(ls.thickness_mm * MM) for ls in self.layers]

    def channel_geometry(self, path: str | None = None) -> ChannelGeometry:
        g = self.geometry
        tx, rx = placement(path or self.paths[0])
        return ChannelGeometry(
            d=g.d_mm * MM,
            e_st=g.e_st_mm * MM,
            e_sr=g.e_sr_mm * MM,
            delta_l=g.delta_l_mm * MM,
            tx_layer=tx,
            rx_layer=rx,
        )

    def electrode_config(self) -> ElectrodeConfig:
        e = self.electrode
        return ElectrodeConfig(
            e_l=e.e_l_mm * MM,
            a_e=None if e.a_e_mm2 is None else e.a_e_mm2 * MM * MM,
            k1=e.k1,
            k2=e.k2,
            m=e.m,
            m_prime=e.m_prime,
        )

    def sweep_spec(self, table: TissueTable | None = None) -> SweepSpec:
        if self.sweep is None:
            raise ConfigError("no sweep configured")
        table = table or self.tissue_table()
        return SweepSpec(
            table=table,
            stack=tuple(self.stack(table)),
            geom=self.channel_geometry(),
            elec=self.electrode_config(),
            param=SWEEP_KEYS[self.sweep.param][0],
            values=self.sweep.values(),
            paths=self.paths,
            freq=self.analysis_frequency_hz,
            current=self.safety.drive_current_a,
        )

    def frequency_spec(self, table: TissueTable | None = None) -> SweepSpec:
        table = table or self.tissue_table()
        return SweepSpec(
            table=table,
            stack=tuple(self.stack(table)),
            geom=self.channel_geometry(),
            elec=self.electrode_config(),
            param="frequency",
            values=self.frequency_hz.grid(),
            paths=self.paths,
            current=self.safety.drive_current_a,
        )


# --------------------------------------------------------------------------- #
# parsing
# --------------------------------------------------------------------------- #

def _num(value, where, kind=float):
    if isinstance(value, bool) or value is None:
        raise ValidationError(f"expected a number, got {value!r}", where)
    try:
        out = kind(value) if kind is float else value
        if kind is int:
            if isinstance(value, float) and value.is_integer():
                out = int(value)
            elif not isinstance(value, int):
                raise TypeError
    except (TypeError, ValueError):
        raise ValidationError(f"expected a number, got {value!r}", where) from None
    if isinstance(out, float) and not math.isfinite(out):
        raise ValidationError(f"must be finite, got {value!r}", where)
    return out


def _mapping(data, where) -> dict:
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        raise ValidationError(f"expected a mapping, got {type(data).__name__}", where)
    return dict(data)


def _reject_unknown(data: dict, allowed: Iterable[str], where: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        sep = "." if where else ""
        raise ValidationError(f"unknown key(s) {unknown}", f"{where}{sep}{unknown[0]}")


def _section(cls, data, where, positive=(), non_negative=()):
    data = _mapping(data, where)
    names = [f.name for f in fields(cls)]
    _reject_unknown(data, names, where)
    kw = {}
    for name in names:
        if name not in data:
            continue
        key = f"{where}.{name}"
        v = data[name]
        if name == "a_e_mm2" and v is None:
            kw[name] = None
            continue
        v = _num(v, key)
        if name in positive and not v > 0:
            raise ValidationError(f"must be > 0, got {v!r}", key)
        if name in non_negative and not v >= 0:
            raise ValidationError(f"must be >= 0, got {v!r}", key)
        kw[name] = v
    return cls(**kw)


def _layers(data, table: TissueTable) -> tuple:
    if data is None:
        return tuple(LayerSpec(lay.name, lay.thickness / MM) for lay in table.tissues.values())
    if not isinstance(data, list):
        raise ValidationError("expected a list of layers", "layers")
    out = []
    for i, rec in enumerate(data):
        where = f"layers[{i}]"
        rec = _mapping(rec, where)
        _reject_unknown(rec, ("name", "thickness_mm"), where)
        if "name" not in rec:
            raise ValidationError("missing 'name'", where)
        name = str(rec["name"])
        if name not in table:
            raise ValidationError(f"tissue {name!r} not in table {table.name!r}", f"{where}.name")
        if "thickness_mm" in rec:
            t = _num(rec["thickness_mm"], f"{where}.thickness_mm")
            if not t > 0:
                raise ValidationError(f"must be > 0, got {t!r}", f"{where}.thickness_mm")
        else:
            t = table[name].thickness / MM
        out.append(LayerSpec(name, t))
    names = [ls.name for ls in out]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate layer names {names}", "layers")
    if len(out) < 2:
        raise ValidationError("at least two layers required", "layers")
    return tuple(out)


def _paths(data) -> tuple:
    if data is None:
        return ALL_PATHS
    if isinstance(data, str):
        data = list(ALL_PATHS) if data.lower() == "all" else [data]
    if not isinstance(data, list) or not data:
        raise ValidationError("expected a non-empty list of paths", "paths")
    try:
        return tuple(dict.fromkeys(path_key(str(p)) for p in data))
    except ConfigError as exc:
        raise ValidationError(str(exc), "paths") from None


def _frequency(data) -> FrequencySettings:
    if data is None:
        return FrequencySettings()
    if isinstance(data, (int, float)) and not isinstance(data, bool):
        f = _num(data, "frequency_hz")
        if not f > 0:
            raise ValidationError(f"must be > 0, got {f!r}", "frequency_hz")
        return FrequencySettings(start=f, stop=f, values=(f,))
    if isinstance(data, list):
        data = {"values": data}
    data = _mapping(data, "frequency_hz")
    _reject_unknown(data, ("start", "stop", "points_per_decade", "values"), "frequency_hz")
    if "values" in data and data["values"] is not None:
        if set(data) - {"values"}:
            raise ValidationError("give either values or start/stop", "frequency_hz")
        raw = data["values"]
        if not isinstance(raw, list) or not raw:
            raise ValidationError("expected a non-empty list", "frequency_hz.values")
        vals = tuple(_num(v, f"frequency_hz.values[{i}]") for i, v in enumerate(raw))
        for i, v in enumerate(vals):
            if not v > 0:
                raise ValidationError(f"must be > 0, got {v!r}", f"frequency_hz.values[{i}]")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("values must be strictly increasing", "frequency_hz.values")
        return FrequencySettings(start=vals[0], stop=vals[-1], values=vals)
    base = FrequencySettings()
    start = _num(data.get("start", base.start), "frequency_hz.start")
    stop = _num(data.get("stop", base.stop), "frequency_hz.stop")
    ppd = _num(data.get("points_per_decade", base.points_per_decade), "frequency_hz.points_per_decade", int)
    if not start > 0:
        raise ValidationError(f"must be > 0, got {start!r}", "frequency_hz.start")
    if not stop >= start:
        raise ValidationError("stop must be >= start", "frequency_hz.stop")
    if ppd < 1:
        raise ValidationError("must be >= 1", "frequency_hz.points_per_decade")
    return FrequencySettings(start=start, stop=stop, points_per_decade=ppd)


def _sweep(data) -> SweepSettings | None:
    if data is None:
        return None
    data = _mapping(data, "sweep")
    _reject_unknown(data, ("param", "start", "stop", "count", "spacing"), "sweep")
    for k in ("param", "start", "stop", "count"):
        if k not in data:
            raise ValidationError(f"missing '{k}'", "sweep")
    try:
        param = sweep_key(str(data["param"]))
    except ConfigError as exc:
        raise ValidationError(str(exc), "sweep.param") from None
    start = _num(data["start"], "sweep.start")
    stop = _num(data["stop"], "sweep.stop")
    count = _num(data["count"], "sweep.count", int)
    spacing = str(data.get("spacing", "linear"))
    if spacing not in ("linear", "log"):
        raise ValidationError("must be 'linear' or 'log'", "sweep.spacing")
    if count < 0:
        raise ValidationError("must be >= 0", "sweep.count")
    if count > 1 and not stop > start:
        raise ValidationError("stop must exceed start", "sweep.stop")
    low_ok = start >= 0 if param == "delta_l_mm" else start > 0
    if not low_ok:
        raise ValidationError(f"out of domain for {param}: {start!r}", "sweep.start")
    if spacing == "log" and not start > 0:
        raise ValidationError("log spacing needs start > 0", "sweep.start")
    return SweepSettings(param, start, stop, count, spacing)


def _output(data) -> OutputSettings:
    data = _mapping(data, "output")
    _reject_unknown(data, ("dir", "plot", "strict"), "output")
    kw = {}
    if "dir" in data:
        kw["dir"] = str(data["dir"])
    for k in ("plot", "strict"):
        if k in data:
            if not isinstance(data[k], bool):
                raise ValidationError(f"expected true/false, got {data[k]!r}", f"output.{k}")
            kw[k] = data[k]
    return OutputSettings(**kw)


_TOP = (
    "table",
    "layers",
    "geometry",
    "electrode",
    "paths",
    "frequency_hz",
    "analysis_frequency_hz",
    "sweep",
    "safety",
    "output",
)


def config_from_dict(data: Mapping | None) -> RunConfig:
    """Resolve a plain mapping into a :class:`RunConfig` with defaults applied."""
    data = _mapping(data, "")
    _reject_unknown(data, _TOP, "")
    table_name = str(data.get("table", "human_forearm"))
    try:
        table = load_tissue_table(table_name)
    except (ParseError, ValidationError) as exc:
        raise ValidationError(str(exc), "table") from None
    elec = _section(ElectrodeSettings, data.get("electrode"), "electrode", positive=("e_l_mm", "k1", "a_e_mm2"))
    if not 0 < elec.k2 < 1:
        raise ValidationError(f"must lie in (0, 1), got {elec.k2!r}", "electrode.k2")
    f0 = _num(data.get("analysis_frequency_hz", BASE_FREQUENCY), "analysis_frequency_hz")
    if not f0 > 0:
        raise ValidationError(f"must be > 0, got {f0!r}", "analysis_frequency_hz")
    cfg = RunConfig(
        table=table_name,
        layers=_layers(data.get("layers"), table),
        geometry=_section(
            GeometrySettings,
            data.get("geometry"),
            "geometry",
            positive=("d_mm", "e_st_mm", "e_sr_mm"),
            non_negative=("delta_l_mm",),
        ),
        electrode=elec,
        paths=_paths(data.get("paths")),
        frequency_hz=_frequency(data.get("frequency_hz")),
        analysis_frequency_hz=f0,
        sweep=_sweep(data.get("sweep")),
        safety=_section(
            SafetySettings,
            data.get("safety"),
            "safety",
            positive=("contact_limit_a", "density_limit_a_per_m2"),
            non_negative=("drive_current_a",),
        ),
        output=_output(data.get("output")),
    )
    names = {ls.name for ls in cfg.layers}
    for p in cfg.paths:
        for layer in placement(p):
            if layer not in names:
                raise ValidationError(f"path {p} needs layer {layer!r} in the stack", "paths")
    return cfg


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain-data form that :func:`config_from_dict` maps back to an equal config."""
    d: dict[str, Any] = {
        "table": cfg.table,
        "layers": [{"name": ls.name, "thickness_mm": ls.thickness_mm} for ls in cfg.layers],
        "geometry": asdict(cfg.geometry),
        "electrode": asdict(cfg.electrode),
        "paths": list(cfg.paths),
    }
    fq = cfg.frequency_hz
    if fq.values is not None:
        d["frequency_hz"] = {"values": list(fq.values)}
    else:
        d["frequency_hz"] = {"start": fq.start, "stop": fq.stop, "points_per_decade": fq.points_per_decade}
    d["analysis_frequency_hz"] = cfg.analysis_frequency_hz
    if cfg.sweep is not None:
        d["sweep"] = asdict(cfg.sweep)
    d["safety"] = asdict(cfg.safety)
    d["output"] = asdict(cfg.output)
    return d


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def _set_dotted(data: dict, key: str, value) -> None:
    parts = key.split(".")
    cur = data
    for p in parts[:-1]:
        nxt = cur.get(p)
        if nxt is None:
            nxt = cur[p] = {}
        if not isinstance(nxt, dict):
            raise ValidationError("cannot set a key below a scalar", key)
        cur = nxt
    cur[parts[-1]] = value


def parse_overrides(items: Iterable[str] | Mapping[str, Any]) -> dict:
    """``["geometry.d_mm=50", ...]`` or a mapping of dotted keys to values."""
    if isinstance(items, Mapping):
        return dict(items)
    out = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"override {item!r} is not of the form key=value")
        try:
            out[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ParseError(f"override {item!r}: {exc}") from None
    return out


def parse_config(path=None, overrides=None) -> RunConfig:
    """Read a YAML config (or start empty) and apply dotted-key overrides.

    An empty or missing-document file yields the full baseline.

    Raises
    ------
    ParseError
        Unreadable file, malformed YAML or a malformed override.
    ValidationError
        A value is out of domain or a key is unknown; the message starts
        with the dotted field path.
    """
    data: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ParseError(f"config file {str(p)!r} not found")
        try:
            loaded = yaml.safe_load(p.read_text())
        except yaml.YAMLError as exc:
            raise ParseError(f"{p}: {exc}") from None
        if loaded is not None and not isinstance(loaded, dict):
            raise ParseError(f"{p}: top level must be a mapping")
        data = loaded or {}
    for key, value in parse_overrides(overrides or {}).items():
        _set_dotted(data, key, value)
    return config_from_dict(data)


def with_overrides(cfg: RunConfig, overrides) -> RunConfig:
    data = config_to_dict(cfg)
    for key, value in parse_overrides(overrides).items():
        _set_dotted(data, key, value)
    return config_from_dict(data)


def with_sweep(cfg: RunConfig, text: str) -> RunConfig:
    """Apply a ``param=start:stop:count`` sweep given in the config's units."""
    name, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or len(parts) != 3:
        raise ParseError(f"sweep {text!r} is not of the form param=start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"sweep {text!r}: start/stop must be numbers and count an integer") from None
    try:
        key = sweep_key(name.strip())
    except ConfigError as exc:
        raise ValidationError(str(exc), "sweep.param") from None
    data = config_to_dict(cfg)
    data["sweep"] = {"param": key, "start": start, "stop": stop, "count": count}
    return config_from_dict(data)


def with_frequency(cfg: RunConfig, text: str) -> RunConfig:
    """``1e5`` for a single frequency or ``start:stop[:points_per_decade]``."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ParseError(f"frequency {text!r} is not a number or start:stop[:ppd] range") from None
    data = config_to_dict(cfg)
    if len(nums) == 1:
        data["frequency_hz"] = nums[0]
        data["analysis_frequency_hz"] = nums[0]
    elif len(nums) in (2, 3):
        rng = {"start": nums[0], "stop": nums[1]}
        if len(nums) == 3:
            rng["points_per_decade"] = nums[2]
        data["frequency_hz"] = rng
    else:
        raise ParseError(f"frequency {text!r} is not a number or start:stop[:ppd] range")
    return config_from_dict(data)


def with_output(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, output=replace(cfg.output, **kw))


__all__ = [
    "PARAMS",
    "RunConfig",
    "config_from_dict",
    "config_to_dict",
    "dump_config",
    "parse_config",
    "parse_overrides",
    "with_frequency",
    "with_overrides",
    "with_sweep",
]
