"""Tissue equivalent circuit model of galvanic-coupled intra-body links."""

from .dielectrics import (
    DispersionParams,
    TissueLayer,
    TissueTable,
    complex_permittivity,
    conductivity,
    eps_double_prime,
    eps_prime,
    load_tissue_table,
)
from .config import RunConfig, parse_config
from .errors import (
    ConfigError,
    DomainError,
    IoError,
    ParseError,
    SingularityError,
    TECError,
    ValidationError,
)
from .impedance import (
    ChannelGeometry,
    ElectrodeConfig,
    closed_form_impedance,
    coupling_impedance,
    cross_impedance,
    direct_impedance,
    longitudinal_impedance,
    tissue_admittance,
    transverse_impedance,
)
from .network import GainPoint, build_network, channel_gain, solve_network
from .safety import SafetyReport, conduction_dominance, contact_check, current_density, safety_report
from .sweeps import (
    SweepResult,
    SweepSpec,
    distance_sweep,
    electrode_size_sweep,
    frequency_sweep,
    misalignment_sweep,
    path_comparison,
    separation_sweep,
    thickness_sweep,
)

__version__ = "0.1.0"
