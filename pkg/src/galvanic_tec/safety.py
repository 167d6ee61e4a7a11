"""Signalling safety checks: contact current, current density, frequency band.

The lumped circuit cannot resolve the field under the electrode, so the
reported density is the conservative average ``I_contact / A_e``. A field
solver would report a lower peak-region value; this module makes no
attempt to reproduce one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dielectrics import EPS0, TissueLayer, TissueTable, eps_double_prime
from .errors import DomainError
from .impedance import ChannelGeometry, ElectrodeConfig
from .network import (
    DRIVE_CURRENT,
    TECNetwork,
    branch_currents,
    build_network,
    solve_network,
    tissue_node,
)

ICNIRP_DENSITY_LIMIT = 25e-3  # A/m^2, general public, 100 kHz - 60 MHz
CONTACT_CURRENT_LIMIT = 1e-3  # A
MIN_SAFE_FREQUENCY = 50e3  # Hz; body signals live at or below this
OPERATING_CAP = 1e6  # Hz
LIMIT_RTOL = 1e-9  # solver rounding on a KCL-exact current must not flip a verdict
DENSITY_DISCLAIMER = (
    "lumped estimate: contact current averaged over the electrode area; "
    "local field peaks are not resolved"
)


@dataclass(frozen=True)
class DensityBreakdown:
    """Current density magnitudes (A/m^2) at the contact."""

    total: float
    conduction: float
    displacement: float

    @property
    def displacement_fraction(self) -> float:
        return self.displacement / self.total if self.total else 0.0


@dataclass(frozen=True)
class Dominance:
    ratios: dict  # tissue -> sigma / (omega eps'' eps0)
    max_safe_frequency: float  # Hz, largest f with every ratio > 1
    operating_cap: float  # Hz

    @property
    def dominant(self) -> bool:
        return all(r > 1 for r in self.ratios.values())


@dataclass(frozen=True)
class SafetyReport:
    frequency: float
    drive_current: float
    contact_current: float
    contact_density: float
    density_limit: float
    contact_limit: float
    conduction_ratio: dict
    max_safe_frequency: float
    drive_voltage: float = math.nan  # V across the source terminals, when known
    verdict: str = field(init=False)
    reasons: tuple = field(init=False)
    disclaimer: str = DENSITY_DISCLAIMER

    def __post_init__(self):
        reasons = tuple(violations(self))
        object.__setattr__(self, "reasons", reasons)
        object.__setattr__(self, "verdict", "fail" if reasons else "pass")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        return {
            "frequency_hz": self.frequency,
            "drive_current_a": self.drive_current,
            "drive_voltage_v": self.drive_voltage,
            "contact_current_a": self.contact_current,
            "contact_density_a_per_m2": self.contact_density,
            "density_limit_a_per_m2": self.density_limit,
            "contact_limit_a": self.contact_limit,
            "conduction_ratio": dict(self.conduction_ratio),
            "max_safe_frequency_hz": self.max_safe_frequency,
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "disclaimer": self.disclaimer,
        }


def _exceeds(value: float, limit: float) -> bool:
    return value > limit * (1 + LIMIT_RTOL)


def violations(report: SafetyReport) -> list[str]:
    """Reasons a report fails; empty when every limit holds.

    Derived from the numeric fields only, so the verdict can always be
    recomputed from a serialized report.
    """
    out = []
    if report.frequency <= MIN_SAFE_FREQUENCY:
        out.append(
            f"frequency {report.frequency:g} Hz overlaps physiological signals "
            f"(<= {MIN_SAFE_FREQUENCY:g} Hz)"
        )
    if _exceeds(report.contact_current, report.contact_limit):
        out.append(
            f"contact current {report.contact_current:.4g} A exceeds {report.contact_limit:.4g} A"
        )
    if _exceeds(report.contact_density, report.density_limit):
        out.append(
            f"contact density {report.contact_density:.4g} A/m^2 exceeds "
            f"{report.density_limit:.4g} A/m^2"
        )
    weak = sorted(k for k, r in report.conduction_ratio.items() if not r > 1)
    if weak:
        out.append(f"displacement current dominates in {', '.join(weak)}")
    return out


def contact_check(
    network: TECNetwork,
    voltages: dict,
    elec: ElectrodeConfig | None = None,
    limit_current: float = CONTACT_CURRENT_LIMIT,
) -> tuple[float, bool]:
    """Current entering tissue at the source electrodes, and whether it is within limit.

    Sums branch-current magnitudes leaving each source terminal and
    reports the larger of the two terminals.
    """
    per_terminal = {}
    for term in network.source[:2]:
        per_terminal[term] = sum(
            abs(i) for br, i in branch_currents(network, voltages) if term in (br.a, br.b)
        )
    total = max(per_terminal.values())
    return total, not _exceeds(total, limit_current)


def current_density(
    current: complex, tissue: TissueLayer, elec: ElectrodeConfig, omega: float
) -> DensityBreakdown:
    """Contact current density split into conduction and displacement parts.

    ``J = (sigma + j omega eps0 eps'') E``; the split follows the admittivity
    ratio of the contacted tissue.
    """
    if not elec.a_e > 0:
        raise DomainError("contact area must be positive")
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    total = abs(current) / elec.a_e
    sigma = tissue.dispersion.sigma_s
    disp = omega * EPS0 * eps_double_prime(tissue.dispersion, omega)
    mag = math.hypot(sigma, disp)
    if mag == 0:
        return DensityBreakdown(total, 0.0, 0.0)
    return DensityBreakdown(total, total * sigma / mag, total * disp / mag)


def conduction_ratio(tissue: TissueLayer, freq: float) -> float:
    """``sigma / (omega eps'' eps0)``; infinite where the dipolar loss vanishes."""
    if not freq > 0:
        raise DomainError(f"frequency must be positive, got {freq!r}")
    omega = 2 * math.pi * freq
    disp = omega * EPS0 * eps_double_prime(tissue.dispersion, omega)
    sigma = tissue.dispersion.sigma_s
    if disp == 0:
        return math.inf if sigma > 0 else 0.0
    return sigma / disp


def _tissues(table) -> list[TissueLayer]:
    if isinstance(table, TissueTable):
        return list(table.tissues.values())
    return list(table)


def max_dominant_frequency(tissues, f_lo=1e3, f_hi=1e9, points_per_decade=200) -> float:
    """Largest frequency in [f_lo, f_hi] below which every ratio stays above 1.

    Scans a log grid upward from ``f_lo`` and refines the first crossing by
    bisection. Returns ``f_hi`` if no crossing is found and 0 if the
    condition already fails at ``f_lo``.
    """
    tissues = _tissues(tissues)

    def ok(f):
        return all(conduction_ratio(t, f) > 1 for t in tissues)

    if not ok(f_lo):
        return 0.0
    n = int(math.ceil(math.log10(f_hi / f_lo) * points_per_decade)) + 1
    grid = np.geomspace(f_lo, f_hi, n)
    prev = grid[0]
    for f in grid[1:]:
        if not ok(f):
            lo, hi = prev, f
            for _ in range(60):
                mid = math.sqrt(lo * hi)
                lo, hi = (mid, hi) if ok(mid) else (lo, mid)
            return lo
        prev = f
    return float(f_hi)


def conduction_dominance(table, f: float) -> Dominance:
    """Per-tissue conduction ratio at ``f`` and the largest conduction-dominant frequency."""
    if not f > 0:
        raise DomainError(f"frequency must be positive, got {f!r}")
    tissues = _tissues(table)
    ratios = {t.name: conduction_ratio(t, f) for t in tissues}
    f_max = max_dominant_frequency(tissues)
    return Dominance(ratios, f_max, min(OPERATING_CAP, f_max))


def safety_report(
    table,
    stack: Sequence[TissueLayer],
    geom: ChannelGeometry,
    elec: ElectrodeConfig,
    freq: float,
    current: float = DRIVE_CURRENT,
    density_limit: float = ICNIRP_DENSITY_LIMIT,
    contact_limit: float = CONTACT_CURRENT_LIMIT,
) -> SafetyReport:
    """Solve the network at ``freq`` and check it against all limits."""
    omega = 2 * math.pi * freq
    # solve at unit drive and scale once: the circuit is linear, and this
    # keeps terminal-voltage cancellation from breaking proportionality
    net = build_network(table, stack, geom, elec, omega, 1.0)
    volts = solve_network(net)
    amp = abs(current)
    i_unit, _ = contact_check(net, volts, elec, contact_limit)
    i_contact = amp * i_unit
    inject, ref, _ = net.source
    v_drive = amp * abs(volts[inject] - volts[ref])
    tx = next(lay for lay in stack if lay.name == geom.tx_layer)
    dens = current_density(i_contact, tx, elec, omega)
    dom = conduction_dominance(stack, freq)
    return SafetyReport(
        frequency=freq,
        drive_current=abs(current),
        contact_current=i_contact,
        contact_density=dens.total,
        density_limit=density_limit,
        contact_limit=contact_limit,
        conduction_ratio=dom.ratios,
        max_safe_frequency=dom.max_safe_frequency,
        drive_voltage=v_drive,
    )


def aggregate_density(reports: Sequence[SafetyReport]) -> float:
    """Worst-case density when several transmitters share a contact region.

    Independent reports add linearly; schedule transmitters so the sum
    stays under the limit.
    """
    return float(sum(r.contact_density for r in reports))


def source_tissue_node(geom: ChannelGeometry, position: str = "txP") -> str:
    return tissue_node(geom.tx_layer, position)
