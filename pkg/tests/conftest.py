import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from foamswell import constitutive as cl

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"
CONFIGS = ROOT / "scripts" / "configs"


@pytest.fixture
def desk_constants():
    return cl.PhysicalConstants(m=1.0, gamma=0.01, k=1.0, k_v=0.5, kappa=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
