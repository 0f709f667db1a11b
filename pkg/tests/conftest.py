"""
Optional Doob Core - Test Configuration

Shared pytest fixtures and configuration for all test types.
"""

import os
import sys
import tempfile
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from optional_doob.filtration import build_tree  # noqa: E402
from optional_doob.instances import (  # noqa: E402
    PowerDensitySpec,
    build_power_density_instance,
    d1_instance,
    d1_process,
    identical_instance,
    shared_transition_instance,
    sup_indicator_process,
)
from optional_doob.measures import MeasureFamily  # noqa: E402
from optional_doob.processes import AdaptedProcess  # noqa: E402

FIXTURES_DIR = Path(__file__).parent / "fixtures"


# =============================================================================
# Test Markers
# =============================================================================

def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line("markers", "unit: Unit tests (fast, isolated)")
    config.addinivalue_line("markers", "integration: Integration tests (cross-module properties on random instances)")
    config.addinivalue_line("markers", "e2e: End-to-end tests (full CLI workflow)")
    config.addinivalue_line("markers", "slow: Tests that take longer to run")


# =============================================================================
# Environment Fixtures
# =============================================================================

ENV_KEYS = ("DOOB_TOLERANCE", "DOOB_SEED", "DOOB_TRIALS", "DOOB_OUTPUT", "LOG_LEVEL", "LOG_TO_FILE")


@pytest.fixture
def isolated_env() -> Generator[dict, None, None]:
    """Clear every variable the configuration reads, restoring them afterwards."""
    original = {k: os.environ.get(k) for k in ENV_KEYS}
    for k in ENV_KEYS:
        os.environ.pop(k, None)

    yield os.environ

    for k, v in original.items():
        if v is None:
            os.environ.pop(k, None)
        else:
            os.environ[k] = v


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Provide a temporary directory for instance files."""
    with tempfile.TemporaryDirectory(prefix="doob_test_") as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def temp_log_dir() -> Generator[Path, None, None]:
    """Provide a temporary directory for log testing."""
    with tempfile.TemporaryDirectory(prefix="doob_test_logs_") as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


# =============================================================================
# Instance Fixtures
# =============================================================================

@pytest.fixture
def d1_family() -> MeasureFamily:
    """Binary tree of depth 2; P_0 uniform, P_1 = (0.3, 0.2, 0.3, 0.2)."""
    return d1_instance()


@pytest.fixture
def d1_f(d1_family) -> AdaptedProcess:
    """The regular supermartingale f_2 = (0.8, 1, 0.9, 1)."""
    return d1_process(d1_family)


@pytest.fixture
def sup_indicator(d1_family) -> AdaptedProcess:
    """max_i E^{P_i}{1_{leaf 0} | F_m}: a supermartingale that is not regular."""
    return sup_indicator_process(d1_family)


@pytest.fixture
def power_family() -> MeasureFamily:
    """k = 2, points (0, 0.5), depth 2: leaves [0,.25), [.25,.5), [.5,.75), [.75,1)."""
    return build_power_density_instance(PowerDensitySpec(2, (0.0, 0.5), 2)).family


@pytest.fixture
def single_family() -> MeasureFamily:
    """One measure on a 3 x 2 tree."""
    tree = build_tree([3, 2])
    return MeasureFamily(tree, [[0.1, 0.2, 0.15, 0.15, 0.3, 0.1]])


@pytest.fixture
def shared_family() -> MeasureFamily:
    """Three measures sharing every transition from level 1 on."""
    return shared_transition_instance(np.random.default_rng(11), [2, 3, 2], k=3)


@pytest.fixture
def identical_family() -> MeasureFamily:
    """Two copies of one measure."""
    return identical_instance(np.random.default_rng(5), [2, 2], k=2)
