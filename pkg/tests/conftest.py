import math

import pytest

from lifi_uplink.config import parse_config
from lifi_uplink.geometry import FrontEndOptics, ScenarioGeometry
from lifi_uplink.modulation import LinkBudget, LowPassChain, ModulationConfig
from lifi_uplink.pathloss_stats import OrientationModel


@pytest.fixture(scope="session")
def geom():
    return ScenarioGeometry()


@pytest.fixture(scope="session")
def optics():
    return FrontEndOptics()


@pytest.fixture(scope="session")
def orient():
    return OrientationModel.for_pose("sitting")


@pytest.fixture(scope="session")
def chain():
    return LowPassChain()


@pytest.fixture(scope="session")
def mod():
    return ModulationConfig.up_to(32)


@pytest.fixture(scope="session")
def budget():
    return LinkBudget()


@pytest.fixture(scope="session")
def cfg():
    return parse_config(preset="table3-sitting")


@pytest.fixture(scope="session")
def scenario(cfg):
    return cfg.scenario()


def deg(x):
    return math.radians(x)
