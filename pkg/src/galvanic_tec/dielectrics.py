"""Frequency-dependent dielectric properties of tissue.

Single-pole Debye relaxation plus a static ionic conductivity. Bundled
tables cover the human forearm (skin, fat, muscle, cortical bone) and a
porcine loin sample (no bone layer).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping

import yaml

from .errors import DomainError, ParseError, ValidationError

EPS0 = 8.8541878128e-12  # vacuum permittivity (F/m)

TISSUE_NAMES = ("skin", "fat", "muscle", "cortical_bone", "custom")
BUNDLED_TABLES = ("human_forearm", "porcine_loin")

_TISSUE_FIELDS = (
    "name",
    "eps_s",
    "eps_inf",
    "tau_s",
    "sigma_s_per_m",
    "thickness_mm",
    "f_w",
    "kappa",
)


@dataclass(frozen=True)
class DispersionParams:
    """Debye parameters of one tissue.

    Parameters
    ----------
    eps_s : float
        Relative permittivity at very low frequency.
    eps_inf : float
        Relative permittivity at very high frequency.
    tau : float
        Relaxation time in seconds.
    sigma_s : float
        Static conductivity in S/m.
    """

    eps_s: float
    eps_inf: float
    tau: float
    sigma_s: float = 0.0

    def __post_init__(self):
        vals = (self.eps_s, self.eps_inf, self.tau, self.sigma_s)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("dispersion parameters must be finite")
        if not self.eps_inf >= 1.0:
            raise ValidationError("eps_inf must be >= 1", "eps_inf")
        if not self.eps_s > self.eps_inf:
            raise ValidationError("eps_s must exceed eps_inf", "eps_s")
        if not self.tau > 0:
            raise ValidationError("tau must be positive", "tau")
        if not self.sigma_s >= 0:
            raise ValidationError("sigma_s must be non-negative", "sigma_s")


@dataclass(frozen=True)
class TissueLayer:
    """A tissue slab: dispersion, thickness (m), hydration factor and kappa."""

    name: str
    thickness: float
    dispersion: DispersionParams
    f_w: float = 0.7
    kappa: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.thickness) and self.thickness > 0):
            raise ValidationError("thickness must be positive", f"{self.name}.thickness")
        if not (math.isfinite(self.f_w) and self.f_w > 0):
            raise ValidationError("f_w must be positive", f"{self.name}.f_w")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValidationError("kappa must be positive", f"{self.name}.kappa")

    def with_thickness(self, thickness: float) -> "TissueLayer":
        return replace(self, thickness=thickness)


@dataclass(frozen=True)
class TissueTable:
    """Named tissues with their default layer parameters and validity band (Hz)."""

    name: str
    tissues: Mapping[str, TissueLayer]
    f_min: float = 1e5
    f_max: float = 1e6
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.f_min > 0 or not self.f_max > self.f_min:
            raise ValidationError("validity band must satisfy 0 < f_min < f_max", "band")

    def __getitem__(self, name: str) -> TissueLayer:
        try:
            return self.tissues[name]
        except KeyError:
            raise KeyError(f"tissue {name!r} not in table {self.name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self.tissues

    def names(self) -> list[str]:
        return list(self.tissues)

    def stack(self, names=None, thicknesses=None) -> list[TissueLayer]:
        """Ordered layer stack, outermost first.

        ``thicknesses`` (metres) overrides the table defaults position-wise.
        """
        names = list(self.tissues) if names is None else list(names)
        layers = [self[n] for n in names]
        if thicknesses is not None:
            if len(thicknesses) != len(layers):
                raise ValidationError("one thickness per layer required", "thicknesses")
            layers = [lay.with_thickness(t) for lay, t in zip(layers, thicknesses)]
        return layers


def eps_prime(p: DispersionParams, omega):
    """Dielectric constant ``eps_inf + (eps_s - eps_inf) / (1 + (omega tau)^2)``."""
    if math.isinf(omega):
        return p.eps_inf
    x = omega * p.tau
    return p.eps_inf + (p.eps_s - p.eps_inf) / (1.0 + x * x)


def eps_double_prime(p: DispersionParams, omega):
    """Dipolar loss factor, peaking at ``(eps_s - eps_inf) / 2`` when omega tau = 1."""
    if math.isinf(omega):
        return 0.0
    x = omega * p.tau
    return (p.eps_s - p.eps_inf) * x / (1.0 + x * x)


def complex_permittivity(p: DispersionParams, omega) -> complex:
    """Relative complex permittivity including the ionic conduction term.

    Returns ``eps' - j (eps'' + sigma / (omega eps0))``.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    loss = eps_double_prime(p, omega) + p.sigma_s / (omega * EPS0)
    return complex(eps_prime(p, omega), -loss)


def conductivity(p: DispersionParams, omega=0.0) -> float:
    """Effective conductivity entering the tissue admittance (S/m).

    The table stores a static value; dispersive loss is carried by eps''.
    """
    return p.sigma_s


# --------------------------------------------------------------------------- #
# Table I/O
# --------------------------------------------------------------------------- #

def _layer_from_record(rec: dict, where: str) -> TissueLayer:
    if not isinstance(rec, dict):
        raise ParseError(f"{where}: expected a mapping")
    unknown = set(rec) - set(_TISSUE_FIELDS)
    if unknown:
        raise ValidationError(f"unknown field(s) {sorted(unknown)}", where)
    missing = {"name", "eps_s", "eps_inf", "tau_s", "sigma_s_per_m"} - set(rec)
    if missing:
        raise ValidationError(f"missing field(s) {sorted(missing)}", where)
    name = str(rec["name"])
    try:
        disp = DispersionParams(
            eps_s=float(rec["eps_s"]),
            eps_inf=float(rec["eps_inf"]),
            tau=float(rec["tau_s"]),
            sigma_s=float(rec["sigma_s_per_m"]),
        )
        return TissueLayer(
            name=name,
            thickness=float(rec.get("thickness_mm", 1.0)) * 1e-3,
            dispersion=disp,
            f_w=float(rec.get("f_w", 0.7)),
            kappa=float(rec.get("kappa", 1.0)),
        )
    except ValidationError as exc:
        raise ValidationError(str(exc), f"{where}.{name}") from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}.{name}: {exc}") from None


def table_from_dict(data: dict, source: str = "") -> TissueTable:
    if not isinstance(data, dict):
        raise ParseError("tissue table must be a mapping")
    unknown = set(data) - {"name", "f_min_hz", "f_max_hz", "tissues"}
    if unknown:
        raise ValidationError(f"unknown field(s) {sorted(unknown)}", "table")
    recs = data.get("tissues")
    if not isinstance(recs, list) or not recs:
        raise ParseError("tissue table needs a non-empty 'tissues' list")
    tissues = {}
    for i, rec in enumerate(recs):
        layer = _layer_from_record(rec, f"tissues[{i}]")
        if layer.name in tissues:
            raise ValidationError(f"duplicate tissue {layer.name!r}", f"tissues[{i}]")
        tissues[layer.name] = layer
    try:
        return TissueTable(
            name=str(data.get("name", Path(source).stem if source else "custom")),
            tissues=tissues,
            f_min=float(data.get("f_min_hz", 1e5)),
            f_max=float(data.get("f_max_hz", 1e6)),
            source=source,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(str(exc)) from None


def table_to_dict(table: TissueTable) -> dict:
    return {
        "name": table.name,
        "f_min_hz": table.f_min,
        "f_max_hz": table.f_max,
        "tissues": [
            {
                "name": lay.name,
                "eps_s": lay.dispersion.eps_s,
                "eps_inf": lay.dispersion.eps_inf,
                "tau_s": lay.dispersion.tau,
                "sigma_s_per_m": lay.dispersion.sigma_s,
                "thickness_mm": lay.thickness * 1e3,
                "f_w": lay.f_w,
                "kappa": lay.kappa,
            }
            for lay in table.tissues.values()
        ],
    }


def dump_tissue_table(table: TissueTable, path) -> None:
    Path(path).write_text(yaml.safe_dump(table_to_dict(table), sort_keys=False))


def load_tissue_table(source) -> TissueTable:
    """Load a bundled table by name or a YAML table file by path.

    Raises
    ------
    ParseError
        The file is missing or is not valid YAML of the expected shape.
    ValidationError
        A tissue violates the dispersion or layer invariants.
    """
    if isinstance(source, TissueTable):
        return source
    src = str(source)
    if src in BUNDLED_TABLES:
        text = resources.files("galvanic_tec").joinpath(f"data/{src}.yaml").read_text()
    else:
        path = Path(src)
        if not path.is_file():
            raise ParseError(f"no bundled table or file named {src!r}")
        text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{src}: {exc}") from None
    return table_from_dict(data, source=src)
