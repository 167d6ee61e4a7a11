"""Impedances of the galvanic current paths and of the electrode contact.

Each tissue branch is a cell-level RC model: an extracellular conductance
in parallel with an intracellular resistance in series with the membrane
capacitance. Path geometry enters through two factors, ``m1`` (area over
length of the conduction channel) and ``m2`` (the capacitive factor).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .dielectrics import EPS0, TissueLayer, complex_permittivity, conductivity
from .errors import DomainError, ValidationError

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ElectrodeConfig:
    """Square electrode and its contact-impedance constants.

    ``k1`` and ``k2`` carry units of ohm * m^2 * Hz^(-m) and
    ohm * m^2 * Hz^(-m'); frequency is in Hz and area in m^2.
    """

    e_l: float = 0.01
    a_e: float | None = None
    k1: float = 5.6234e4
    k2: float = 0.5
    m: float = -1.15
    m_prime: float = -0.81

    def __post_init__(self):
        if self.a_e is None:
            object.__setattr__(self, "a_e", self.e_l * self.e_l)
        if not (math.isfinite(self.e_l) and self.e_l > 0):
            raise ValidationError("electrode side must be positive", "electrode.e_l")
        if not (math.isfinite(self.a_e) and self.a_e > 0):
            raise ValidationError("contact area must be positive", "electrode.a_e")
        if not 0 < self.k2 < 1:
            raise ValidationError("k2 must lie in (0, 1)", "electrode.k2")
        if not self.k1 > 0:
            raise ValidationError("k1 must be positive", "electrode.k1")


@dataclass(frozen=True)
class ChannelGeometry:
    """Transmitter/receiver placement, all lengths in metres."""

    d: float = 0.1
    e_st: float = 0.05
    e_sr: float = 0.05
    delta_l: float = 0.0
    tx_layer: str = "skin"
    rx_layer: str = "skin"

    def __post_init__(self):
        for name in ("d", "e_st", "e_sr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError("must be positive", f"geometry.{name}")
        if not (math.isfinite(self.delta_l) and self.delta_l >= 0):
            raise ValidationError("must be non-negative", "geometry.delta_l")

    @property
    def effective_distance(self) -> float:
        """Transmitter-receiver distance including lateral misalignment."""
        return math.hypot(self.d, self.delta_l)


@dataclass(frozen=True)
class PathImpedanceSet:
    z_d_tx: complex
    z_d_rx: complex
    z_l: complex
    z_c: complex
    z_t_up: complex | None
    z_t_down: complex | None


def tissue_admittance(layer: TissueLayer, m1: float, m2: float, omega: float) -> complex:
    """Admittance of a tissue channel with geometry factors ``m1``, ``m2`` (m).

    ``F_W * (sigma m1 + 1 / (R_int + 1 / (j omega eps m2)))`` with
    ``R_int = 1 / (sigma kappa m1)`` and ``eps`` the absolute complex
    permittivity. Degree one in the pair (m1, m2).
    """
    if not (m1 > 0 and m2 > 0):
        raise DomainError(f"geometry factors must be positive (m1={m1!r}, m2={m2!r})")
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    p = layer.dispersion
    sigma = conductivity(p, omega)
    y_cap = 1j * omega * EPS0 * complex_permittivity(p, omega) * m2
    g_int = sigma * layer.kappa * m1
    # series R_int + C as a product over sum of admittances; g_int may be 0
    y_cell = g_int * y_cap / (g_int + y_cap) if g_int else 0j
    return layer.f_w * (sigma * m1 + y_cell)


def _z(layer, m1, m2, omega) -> complex:
    return 1.0 / tissue_admittance(layer, m1, m2, omega)


def direct_impedance(layer, geom: ChannelGeometry, elec: ElectrodeConfig, omega, side="tx"):
    """Return-path impedance between the two electrodes of one node.

    ``m1 = E_L T / E_S`` with ``E_S`` the separation on ``side``.
    """
    if side == "tx":
        e_s = geom.e_st
    elif side == "rx":
        e_s = geom.e_sr
    else:
        raise ValueError(f"side must be 'tx' or 'rx', not {side!r}")
    t = layer.thickness
    return _z(layer, elec.e_l * t / e_s, t, omega)


def longitudinal_impedance(layer, geom: ChannelGeometry, elec: ElectrodeConfig, omega):
    """Impedance along the link axis, ``m1 = E_L T / sqrt(D^2 + dl^2)``."""
    t = layer.thickness
    return _z(layer, elec.e_l * t / geom.effective_distance, t, omega)


def cross_impedance(layer, geom: ChannelGeometry, elec: ElectrodeConfig, omega):
    """Diagonal impedance from a transmitter electrode to the opposite receiver electrode.

    ``m1 = sqrt(2) E_L T / sqrt(D'^2 + E_ST^2)`` where ``D'`` is the
    misalignment-corrected distance, so the diagonal lengthens with the
    longitudinal path. At zero misalignment ``D' = D``.
    """
    t = layer.thickness
    diag = math.hypot(geom.effective_distance, geom.e_st)
    return _z(layer, SQRT2 * elec.e_l * t / diag, t, omega)


def _half_slab(layer, elec, omega) -> complex:
    h = layer.thickness / 2
    return _z(layer, elec.a_e / h, h, omega)


def transverse_impedance(upper: TissueLayer, lower: TissueLayer, elec: ElectrodeConfig, omega):
    """Inter-layer impedance under one electrode.

    The current crosses from mid-plane to mid-plane: half of each slab in
    series, with the electrode area as cross-section.
    """
    return _half_slab(upper, elec, omega) + _half_slab(lower, elec, omega)


def coupling_impedance(elec: ElectrodeConfig, omega: float) -> complex:
    """Electrode-tissue contact: ``Re`` in parallel with a capacitive ``Xe``.

    ``Re = K1 f^m / A_e`` and ``Xe = K2 f^m' / A_e``.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    f = omega / (2 * math.pi)
    r_e = elec.k1 * f**elec.m / elec.a_e
    z_x = -1j * elec.k2 * f**elec.m_prime / elec.a_e
    return r_e * z_x / (r_e + z_x)


def path_impedances(
    layer: TissueLayer,
    geom: ChannelGeometry,
    elec: ElectrodeConfig,
    omega: float,
    above: TissueLayer | None = None,
    below: TissueLayer | None = None,
) -> PathImpedanceSet:
    return PathImpedanceSet(
        z_d_tx=direct_impedance(layer, geom, elec, omega, "tx"),
        z_d_rx=direct_impedance(layer, geom, elec, omega, "rx"),
        z_l=longitudinal_impedance(layer, geom, elec, omega),
        z_c=cross_impedance(layer, geom, elec, omega),
        z_t_up=transverse_impedance(above, layer, elec, omega) if above else None,
        z_t_down=transverse_impedance(layer, below, elec, omega) if below else None,
    )


# --------------------------------------------------------------------------- #
# Resistivity-form closed expressions (trend cross-checks only)
# --------------------------------------------------------------------------- #

def _zt(rho, omega, eps, t, e_l, gamma=0.0):
    return (t + gamma) * (rho + 1j * omega * eps) / (rho * e_l**2 * (rho + 2j * omega * eps))


def _zl(rho, omega, eps, t, d, a, delta_l=0.0):
    dd = math.hypot(d, delta_l)
    return dd * (t * rho + 1j * omega * eps * dd) / (a * rho * (t * rho + 2j * omega * eps * dd))


def _zc(rho, omega, eps, t, d, e_s, e_l):
    s = d * d + e_s * e_s
    num = cmath.sqrt(2 * s) * (t * t * rho + 1j * omega * eps * s)
    return num / (2 * rho * e_l * t * (t * t * rho + 2j * omega * eps * s))


def _zd(rho, omega, eps, d, e_s, e_l):
    num = e_s * (d * d * rho + 1j * omega * eps * e_s * e_s)
    return num / (rho * e_l * d * (d * d * rho + 2j * omega * eps * e_s * e_s))


_CLOSED = {"Z_T": _zt, "Z_L": _zl, "Z_C": _zc, "Z_D": _zd}


def closed_form_impedance(kind: str, **params) -> complex:
    """Evaluate a resistivity-form closed expression.

    ``kind`` is one of ``Z_T`` (rho, omega, eps, t, e_l, gamma),
    ``Z_L`` (rho, omega, eps, t, d, a, delta_l), ``Z_C`` (rho, omega, eps,
    t, d, e_s, e_l) or ``Z_D`` (rho, omega, eps, d, e_s, e_l). These are
    kept apart from the solver and used to cross-check trend directions.
    """
    try:
        fn = _CLOSED[kind]
    except KeyError:
        raise ValueError(f"unknown closed form {kind!r}; expected {sorted(_CLOSED)}") from None
    try:
        return complex(fn(**params))
    except ZeroDivisionError:
        raise DomainError(f"{kind}: zero denominator for {params}") from None
