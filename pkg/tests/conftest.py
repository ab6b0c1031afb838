import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from uavmimo.config import ScenarioConfig
from uavmimo.geometry import ArrayGeometry

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def default_cfg() -> ScenarioConfig:
    return ScenarioConfig()


@pytest.fixture(scope="session")
def array() -> ArrayGeometry:
    """The default 8x16 panel pointing along +x."""
    return ArrayGeometry(rows=8, cols=16, spacing_wavelengths=0.5,
                         boresight_az_deg=0.0)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance verdict lines after the run.

    The acceptance tests print one [PASS]/[FAIL] line each, but default
    output capture hides stdout of passing tests; repeating the recorded
    lines here keeps them visible in a plain ``pytest`` log.
    """
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULT_LINES", []) if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
