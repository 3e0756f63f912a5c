import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from artifact import Ball, OperatorSpec, build_grid


@pytest.fixture(scope="session")
def spec2():
    return OperatorSpec(kind="p_laplace", t=2.0)


@pytest.fixture(scope="session")
def spec3():
    return OperatorSpec(kind="p_laplace", t=3.0)


@pytest.fixture(scope="session")
def spec15():
    return OperatorSpec(kind="p_laplace", t=1.5)


@pytest.fixture(scope="session")
def disk_grid():
    """Small disk grid shared by solver-facing tests."""
    return build_grid(Ball([0.0, 0.0], 0.5), 1.0 / 16.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
