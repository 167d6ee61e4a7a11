import warnings

import pytest

from galvanic_tec.dielectrics import load_tissue_table
from galvanic_tec.impedance import ChannelGeometry, ElectrodeConfig
from galvanic_tec.network import BandWarning

ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def human():
    return load_tissue_table("human_forearm")


@pytest.fixture(scope="session")
def porcine():
    return load_tissue_table("porcine_loin")


@pytest.fixture
def geom():
    return ChannelGeometry()


@pytest.fixture
def elec():
    return ElectrodeConfig()


@pytest.fixture(autouse=True)
def _quiet_band():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandWarning)
        yield


@pytest.fixture
def acceptance_log(request):
    """Append one summary line per acceptance criterion."""
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
