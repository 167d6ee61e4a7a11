"""One-factor-at-a-time parameter studies over the four placement paths.

A sweep perturbs one parameter of a base configuration, re-derives every
impedance and solves the network afresh at each point. Values are in SI
units (Hz, m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dielectrics import TissueLayer, TissueTable
from .errors import ConfigError, TECError
from .impedance import ChannelGeometry, ElectrodeConfig
from .network import DRIVE_CURRENT, PATHS, GainPoint, channel_gain, placement, with_path

PARAMS = (
    "frequency",
    "fat_thickness",
    "muscle_thickness",
    "d",
    "e_s_both",
    "delta_l",
    "e_l",
)
UNITS = {
    "frequency": "hz",
    "fat_thickness": "m",
    "muscle_thickness": "m",
    "d": "m",
    "e_s_both": "m",
    "delta_l": "m",
    "e_l": "m",
}
ALL_PATHS = tuple(PATHS)
BASE_FREQUENCY = 1e5


def log_grid(start: float, stop: float, points_per_decade: int = 50) -> tuple[float, ...]:
    """Log-spaced grid including both ends, about ``points_per_decade`` per decade."""
    if not (start > 0 and stop > start):
        raise ConfigError(f"log grid needs 0 < start < stop, got {start!r}, {stop!r}")
    if points_per_decade < 1:
        raise ConfigError("points_per_decade must be at least 1")
    n = max(2, int(round(math.log10(stop / start) * points_per_decade)) + 1)
    return tuple(float(v) for v in np.geomspace(start, stop, n))


def default_values(param: str, base_stack: Sequence[TissueLayer] = ()) -> tuple[float, ...]:
    """Default grids: 100 kHz - 1 MHz, D and E_S 20-100 mm, fat 0.5-60 mm."""
    lin = lambda a, b, n: tuple(float(v) for v in np.linspace(a, b, n))  # noqa: E731
    if param == "frequency":
        return log_grid(1e5, 1e6)
    if param in ("d", "e_s_both"):
        return lin(0.02, 0.1, 17)
    if param == "fat_thickness":
        return tuple(float(v) for v in np.geomspace(5e-4, 0.06, 25))
    if param == "muscle_thickness":
        base = next((lay.thickness for lay in base_stack if lay.name == "muscle"), 0.015)
        return lin(base, base + 0.04, 9)
    if param == "delta_l":
        return (0.0, 0.01, 0.02, 0.04)
    if param == "e_l":
        return lin(0.005, 0.03, 11)
    raise ConfigError(f"unknown sweep parameter {param!r}; expected one of {list(PARAMS)}")


def _check_value(param: str, v: float) -> None:
    if not math.isfinite(v):
        raise ConfigError(f"{param} value {v!r} is not finite")
    if param == "delta_l":
        if v < 0:
            raise ConfigError(f"delta_l must be >= 0, got {v!r}")
    elif not v > 0:
        raise ConfigError(f"{param} must be > 0, got {v!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Base configuration plus the swept parameter and its values.

    ``freq`` is the analysis frequency for non-frequency sweeps.
    """

    table: TissueTable | None
    stack: tuple
    geom: ChannelGeometry
    elec: ElectrodeConfig
    param: str
    values: tuple
    paths: tuple = ALL_PATHS
    freq: float = BASE_FREQUENCY
    current: complex = DRIVE_CURRENT

    def __post_init__(self):
        if self.param not in PARAMS:
            raise ConfigError(f"unknown sweep parameter {self.param!r}; expected one of {list(PARAMS)}")
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "stack", tuple(self.stack))
        for v in vals:
            _check_value(self.param, v)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError(f"{self.param} values must be strictly increasing")
        paths = tuple(dict.fromkeys(path_key(p) for p in self.paths))
        if not paths:
            raise ConfigError("at least one path required")
        object.__setattr__(self, "paths", paths)
        if not self.freq > 0:
            raise ConfigError(f"frequency must be positive, got {self.freq!r}")
        names = [lay.name for lay in self.stack]
        if self.param == "fat_thickness" and "fat" not in names:
            raise ConfigError("fat_thickness sweep needs a 'fat' layer in the stack")
        if self.param == "muscle_thickness" and "muscle" not in names:
            raise ConfigError("muscle_thickness sweep needs a 'muscle' layer in the stack")

    def point(self, value: float):
        """(stack, geom, elec, freq) with the swept parameter set to ``value``."""
        stack, geom, elec, freq = list(self.stack), self.geom, self.elec, self.freq
        p = self.param
        if p == "frequency":
            freq = value
        elif p in ("fat_thickness", "muscle_thickness"):
            name = p.split("_")[0]
            stack = [lay.with_thickness(value) if lay.name == name else lay for lay in stack]
        elif p == "d":
            geom = replace(geom, d=value)
        elif p == "e_s_both":
            geom = replace(geom, e_st=value, e_sr=value)
        elif p == "delta_l":
            geom = replace(geom, delta_l=value)
        elif p == "e_l":
            # keep a custom contact area only if it was set independently
            a_e = None if math.isclose(elec.a_e, elec.e_l**2) else elec.a_e
            elec = replace(elec, e_l=value, a_e=a_e)
        return stack, geom, elec, freq


def path_key(path: str) -> str:
    tx, rx = placement(path)
    return next(k for k, v in PATHS.items() if v == (tx, rx))


@dataclass(frozen=True)
class SweepRecord:
    value: float
    path: str
    point: GainPoint


@dataclass(frozen=True)
class SweepResult:
    param: str
    records: tuple
    metadata: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.records)

    @property
    def unit(self) -> str:
        return UNITS[self.param]

    def series(self, path: str) -> tuple[np.ndarray, np.ndarray]:
        """(values, gains) for one path, in sweep order."""
        key = path_key(path)
        recs = [r for r in self.records if r.path == key]
        return np.array([r.value for r in recs]), np.array([r.point.gain for r in recs])

    def paths(self) -> list[str]:
        return list(dict.fromkeys(r.path for r in self.records))


def describe(spec: SweepSpec) -> dict:
    """Plain-data echo of every resolved input of a sweep."""
    g, e = spec.geom, spec.elec
    return {
        "table": spec.table.name if spec.table is not None else None,
        "param": spec.param,
        "unit": UNITS[spec.param],
        "values": list(spec.values),
        "paths": list(spec.paths),
        "frequency_hz": spec.freq,
        "drive_current_a": abs(spec.current),
        "stack": [
            {
                "name": lay.name,
                "thickness_m": lay.thickness,
                "eps_s": lay.dispersion.eps_s,
                "eps_inf": lay.dispersion.eps_inf,
                "tau_s": lay.dispersion.tau,
                "sigma_s_per_m": lay.dispersion.sigma_s,
                "f_w": lay.f_w,
                "kappa": lay.kappa,
            }
            for lay in spec.stack
        ],
        "geometry_m": {"d": g.d, "e_st": g.e_st, "e_sr": g.e_sr, "delta_l": g.delta_l},
        "electrode": {
            "e_l_m": e.e_l,
            "a_e_m2": e.a_e,
            "k1": e.k1,
            "k2": e.k2,
            "m": e.m,
            "m_prime": e.m_prime,
        },
    }


def _annotate(exc: Exception, spec: SweepSpec, value: float, path: str) -> Exception:
    where = f"sweep point {spec.param}={value!r} path={path}"
    try:
        new = type(exc)(f"{exc} [{where}]")
    except Exception:
        new = ConfigError(f"{exc} [{where}]")
    new.sweep_point = (spec.param, value, path)
    return new


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate every (value, path) pair in spec order."""
    records = []
    for value in spec.values:
        stack, geom, elec, freq = spec.point(value)
        for path in spec.paths:
            try:
                gp = channel_gain(spec.table, stack, with_path(geom, path), elec, freq, spec.current)
            except (TECError, ArithmeticError, ValueError) as exc:
                raise _annotate(exc, spec, value, path) from exc
            records.append(SweepRecord(value, path, gp))
    return SweepResult(spec.param, tuple(records), describe(spec))


def _require(spec: SweepSpec, allowed) -> SweepResult:
    if spec.param not in allowed:
        raise ConfigError(f"expected a {' or '.join(allowed)} sweep, got {spec.param!r}")
    return run_sweep(spec)


def frequency_sweep(spec: SweepSpec) -> SweepResult:
    return _require(spec, ("frequency",))


def thickness_sweep(spec: SweepSpec) -> SweepResult:
    return _require(spec, ("fat_thickness", "muscle_thickness"))


def distance_sweep(spec: SweepSpec) -> SweepResult:
    return _require(spec, ("d",))


def separation_sweep(spec: SweepSpec) -> SweepResult:
    """Transmitter and receiver electrode separations moved together."""
    return _require(spec, ("e_s_both",))


def misalignment_sweep(spec: SweepSpec) -> SweepResult:
    return _require(spec, ("delta_l",))


def electrode_size_sweep(spec: SweepSpec) -> SweepResult:
    return _require(spec, ("e_l",))


@dataclass(frozen=True)
class PathComparison:
    """Per-path gain points on one stack at each requested frequency."""

    frequencies: tuple
    points: dict  # path -> tuple of GainPoint, aligned with frequencies

    def at(self, freq: float) -> dict:
        i = self.frequencies.index(freq)
        return {p: pts[i] for p, pts in self.points.items()}

    def ordering(self, freq: float) -> list[str]:
        """Paths sorted by descending gain at ``freq``."""
        pts = self.at(freq)
        return sorted(pts, key=lambda p: -pts[p].gain)

    def gap(self, better: str, worse: str, freq: float) -> float:
        pts = self.at(freq)
        return pts[path_key(better)].gain - pts[path_key(worse)].gain


def path_comparison(
    table: TissueTable | None,
    stack: Sequence[TissueLayer],
    geom: ChannelGeometry,
    elec: ElectrodeConfig,
    freqs: Sequence[float] = (BASE_FREQUENCY,),
    current: complex = DRIVE_CURRENT,
) -> PathComparison:
    """All four placements evaluated on the identical stack."""
    freqs = tuple(float(f) for f in freqs)
    points = {
        path: tuple(channel_gain(table, stack, with_path(geom, path), elec, f, current) for f in freqs)
        for path in ALL_PATHS
    }
    return PathComparison(freqs, points)
