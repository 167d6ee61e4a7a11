"""Layered tissue circuit: graph construction, nodal assembly and solve.

Every tissue layer contributes four nodes, one under each electrode
(transmitter source/reference, receiver positive/negative). Four more
terminal nodes sit on the electrode side of the coupling impedances. A
current source drives the transmitter terminals; the receiver terminals
are probed open-circuit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .dielectrics import TissueLayer, TissueTable
from .errors import ConfigError, SingularityError
from .impedance import (
    ChannelGeometry,
    ElectrodeConfig,
    coupling_impedance,
    cross_impedance,
    direct_impedance,
    longitudinal_impedance,
    transverse_impedance,
)

POSITIONS = ("txP", "txN", "rxP", "rxN")
DRIVE_CURRENT = 1e-3  # A
BAND = (50e3, 2e6)  # Hz, outside this the model is extrapolating
COND_WARN = 1e12

_LAYER_LETTER = {"skin": "S", "fat": "F", "muscle": "M", "cortical_bone": "B"}
PATHS = {
    "S-S": ("skin", "skin"),
    "S-M": ("skin", "muscle"),
    "M-S": ("muscle", "skin"),
    "M-M": ("muscle", "muscle"),
}


class ConditionWarning(RuntimeWarning):
    """The nodal matrix is badly conditioned; results may be inaccurate."""


class BandWarning(UserWarning):
    """A requested frequency lies outside the model's validity band."""


@dataclass(frozen=True)
class Node:
    id: str
    kind: str  # "tissue" | "terminal"
    position: str
    layer: str | None = None


@dataclass(frozen=True)
class Branch:
    a: str
    b: str
    z: complex
    label: str


@dataclass(frozen=True)
class TECNetwork:
    nodes: tuple[Node, ...]
    branches: tuple[Branch, ...]
    source: tuple[str, str, complex]  # (inject node, reference node, amperes)
    probe: tuple[str, str]

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def branches_at(self, node: str) -> list[Branch]:
        return [b for b in self.branches if node in (b.a, b.b)]


@dataclass(frozen=True)
class NodalSystem:
    """Grounded admittance system ``m_g @ v = i_vec``.

    ``index`` maps node id to row; the reference node has no row.
    """

    m_g: np.ndarray
    i_vec: np.ndarray
    index: dict
    reference: str


@dataclass(frozen=True)
class GainPoint:
    frequency: float
    gain: float
    phase: float
    path: str


def tissue_node(layer: str, position: str) -> str:
    return f"{layer}.{position}"


def terminal_node(position: str) -> str:
    return f"term.{position}"


def path_label(tx_layer: str, rx_layer: str) -> str:
    def letter(name):
        return _LAYER_LETTER.get(name, name)

    return f"{letter(tx_layer)}-{letter(rx_layer)}"


def placement(path: str) -> tuple[str, str]:
    """(tx_layer, rx_layer) for a path label such as ``"S-M"`` or ``"sm"``."""
    key = path.upper()
    if "-" not in key and len(key) == 2:
        key = f"{key[0]}-{key[1]}"
    try:
        return PATHS[key]
    except KeyError:
        raise ConfigError(f"unknown path {path!r}; expected one of {list(PATHS)}") from None


def build_network(
    table: TissueTable | None,
    stack: Sequence[TissueLayer],
    geom: ChannelGeometry,
    elec: ElectrodeConfig,
    omega: float,
    current: complex = DRIVE_CURRENT,
) -> TECNetwork:
    """Assemble the layered circuit at angular frequency ``omega``.

    Parameters
    ----------
    table : TissueTable or None
        When given, every stack layer and both placement layers must be
        present in it.
    stack : sequence of TissueLayer
        Outermost layer first. At least two layers.
    """
    stack = list(stack)
    if len(stack) < 2:
        raise ConfigError("layer stack needs at least two layers")
    names = [lay.name for lay in stack]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate layer names in stack: {names}")
    for which, name in (("tx_layer", geom.tx_layer), ("rx_layer", geom.rx_layer)):
        if name not in names:
            raise ConfigError(f"{which} {name!r} not in stack {names}")
        if table is not None and name not in table:
            raise ConfigError(f"{which} {name!r} not in tissue table {table.name!r}")

    nodes = []
    branches = []
    for lay in stack:
        for pos in POSITIONS:
            nodes.append(Node(tissue_node(lay.name, pos), "tissue", pos, lay.name))
        n = lambda pos, _l=lay.name: tissue_node(_l, pos)  # noqa: E731
        z_dt = direct_impedance(lay, geom, elec, omega, side="tx")
        z_dr = direct_impedance(lay, geom, elec, omega, side="rx")
        z_l = longitudinal_impedance(lay, geom, elec, omega)
        z_c = cross_impedance(lay, geom, elec, omega)
        branches += [
            Branch(n("txP"), n("txN"), z_dt, f"Z_D^{lay.name}"),
            Branch(n("rxP"), n("rxN"), z_dr, f"Z_DR^{lay.name}"),
            Branch(n("txP"), n("rxP"), z_l, f"Z_L^{lay.name}"),
            Branch(n("txN"), n("rxN"), z_l, f"Z_L^{lay.name}"),
            Branch(n("txP"), n("rxN"), z_c, f"Z_C^{lay.name}"),
            Branch(n("txN"), n("rxP"), z_c, f"Z_C^{lay.name}"),
        ]
    for upper, lower in zip(stack, stack[1:]):
        z_t = transverse_impedance(upper, lower, elec, omega)
        for pos in POSITIONS:
            branches.append(
                Branch(
                    tissue_node(upper.name, pos),
                    tissue_node(lower.name, pos),
                    z_t,
                    f"Z_T^{upper.name}-{lower.name}",
                )
            )
    z_co = coupling_impedance(elec, omega)
    for pos in POSITIONS:
        nodes.append(Node(terminal_node(pos), "terminal", pos))
        layer = geom.tx_layer if pos.startswith("tx") else geom.rx_layer
        branches.append(Branch(terminal_node(pos), tissue_node(layer, pos), z_co, f"Z_Co^{pos}"))

    return TECNetwork(
        nodes=tuple(nodes),
        branches=tuple(branches),
        source=(terminal_node("txP"), terminal_node("txN"), complex(current)),
        probe=(terminal_node("rxP"), terminal_node("rxN")),
    )


def laplacian(network: TECNetwork) -> tuple[np.ndarray, dict]:
    """Full (ungrounded) complex admittance matrix and node index."""
    index = {nid: i for i, nid in enumerate(network.node_ids())}
    n = len(index)
    y = np.zeros((n, n), dtype=complex)
    for br in network.branches:
        if br.z == 0:
            raise SingularityError(f"zero impedance on branch {br.label} ({br.a}-{br.b})")
        g = 1.0 / br.z
        i, j = index[br.a], index[br.b]
        y[i, i] += g
        y[j, j] += g
        y[i, j] -= g
        y[j, i] -= g
    return y, index


def assemble(network: TECNetwork) -> NodalSystem:
    """Grounded admittance matrix with the source reference node removed."""
    y, index = laplacian(network)
    inject, ref, current = network.source
    r = index[ref]
    keep = [i for i in range(len(index)) if i != r]
    m_g = y[np.ix_(keep, keep)]
    grounded = {nid: k for k, nid in enumerate(nid for nid in index if nid != ref)}
    i_vec = np.zeros(len(keep), dtype=complex)
    i_vec[grounded[inject]] = current
    return NodalSystem(m_g=m_g, i_vec=i_vec, index=grounded, reference=ref)


def _refined_solve(m: np.ndarray, b: np.ndarray, steps: int = 3) -> np.ndarray:
    # residuals in extended precision recover accuracy lost to conditioning
    x = np.linalg.solve(m, b)
    ml, bl = m.astype(np.clongdouble), b.astype(np.clongdouble)
    for _ in range(steps):
        r = (bl - ml @ x.astype(np.clongdouble)).astype(complex)
        if not r.any():
            break
        x = x + np.linalg.solve(m, r)
    return x


def solve(system: NodalSystem) -> dict:
    """Node voltages (reference node at 0 V).

    Dense LU with partial pivoting. Warns with :class:`ConditionWarning`
    when the condition number exceeds 1e12 and raises
    :class:`SingularityError` once it reaches 1 / machine epsilon.
    """
    m = system.m_g
    if m.size == 0:
        return {system.reference: 0j}
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond * np.finfo(float).eps >= 1.0:
        raise SingularityError(f"nodal matrix is singular (condition number {cond:.3g})")
    if cond > COND_WARN:
        warnings.warn(f"nodal matrix condition number {cond:.3g}", ConditionWarning, stacklevel=2)
    try:
        # solve for a unit-scaled source so the response is linear in the
        # drive amplitude to rounding of a single multiply
        scale = np.abs(system.i_vec).max()
        if scale == 0:
            v = np.zeros_like(system.i_vec)
        else:
            v = scale * _refined_solve(m, system.i_vec / scale)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(str(exc)) from None
    volts = {nid: complex(v[k]) for nid, k in system.index.items()}
    volts[system.reference] = 0j
    return volts


def solve_network(network: TECNetwork) -> dict:
    return solve(assemble(network))


def branch_currents(network: TECNetwork, voltages: dict) -> list[tuple[Branch, complex]]:
    """Current on each branch, positive from ``branch.a`` to ``branch.b``."""
    return [(br, (voltages[br.a] - voltages[br.b]) / br.z) for br in network.branches]


def kcl_residual(network: TECNetwork, voltages: dict) -> dict:
    """Net current leaving each node minus the source injection there."""
    res = {nid: 0j for nid in network.node_ids()}
    for br, i in branch_currents(network, voltages):
        res[br.a] += i
        res[br.b] -= i
    inject, ref, current = network.source
    res[inject] -= current
    res[ref] += current
    return res


def transfer_ratio(network: TECNetwork, voltages: dict) -> complex:
    """V_o / V_I: probe pair voltage over drive pair voltage."""
    inject, ref, _ = network.source
    p, q = network.probe
    v_in = voltages[inject] - voltages[ref]
    return (voltages[p] - voltages[q]) / v_in


def wrap_phase(h: complex) -> float:
    """Phase of ``h`` in degrees, modulo the receiver lead polarity.

    The differential receiver has no preferred lead order, so the angle is
    folded into (-90, 90]; a purely imaginary ratio maps to +90.
    """
    deg = math.degrees(math.atan2(h.imag, h.real))
    deg = (deg + 90.0) % 180.0 - 90.0
    if deg == -90.0:
        deg = 90.0
    return deg


def check_band(freq: float) -> None:
    lo, hi = BAND
    if not lo <= freq <= hi:
        warnings.warn(
            f"{freq:g} Hz outside the {lo:g}-{hi:g} Hz validity band", BandWarning, stacklevel=3
        )


def channel_gain(
    table: TissueTable | None,
    stack: Sequence[TissueLayer],
    geom: ChannelGeometry,
    elec: ElectrodeConfig,
    freq: float,
    current: complex = DRIVE_CURRENT,
) -> GainPoint:
    """Gain ``20 log10 |V_o / V_I|`` and phase at ``freq`` (Hz)."""
    if not freq > 0:
        raise ConfigError(f"frequency must be positive, got {freq!r}")
    check_band(freq)
    net = build_network(table, stack, geom, elec, 2 * math.pi * freq, current)
    if current != 0:
        # the ratio is drive independent; forming it from the unit-drive
        # solution avoids per-node rounding of the drive multiply
        net = replace(net, source=(*net.source[:2], 1.0))
    h = transfer_ratio(net, solve_network(net))
    mag = abs(h)
    gain = 20 * math.log10(mag) if mag > 0 else -math.inf
    return GainPoint(freq, gain, wrap_phase(h), path_label(geom.tx_layer, geom.rx_layer))


def with_path(geom: ChannelGeometry, path: str) -> ChannelGeometry:
    tx, rx = placement(path)
    return replace(geom, tx_layer=tx, rx_layer=rx)
