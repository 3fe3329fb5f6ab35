import math
from pathlib import Path

import numpy as np
import pytest

from cylinderlab import CouplingMatrices, SpatialGrid, cubic_nonlinearity

PI = math.pi


def disc_eig(grid: SpatialGrid, j: int = 1) -> float:
    """Exact eigenvalue of the three-point Dirichlet Laplacian for mode j."""
    h = grid.h
    return 4.0 * math.sin(j * PI * h / (2.0 * grid.length)) ** 2 / h**2


def l2_of(grid: SpatialGrid, values: np.ndarray) -> float:
    return math.sqrt(grid.h * float(np.sum(np.asarray(values) ** 2)))


@pytest.fixture(scope="session")
def grid32():
    return SpatialGrid(PI, 32)


@pytest.fixture(scope="session")
def grid48():
    return SpatialGrid(PI, 48)


@pytest.fixture(scope="session")
def grid64():
    return SpatialGrid(PI, 64)


@pytest.fixture(scope="session")
def grid128():
    return SpatialGrid(PI, 128)


@pytest.fixture(scope="session")
def scalar_mats():
    return CouplingMatrices.scalar()


@pytest.fixture(scope="session")
def chafee2():
    return cubic_nonlinearity(2.0)


@pytest.fixture(scope="session")
def configs_dir():
    return Path(__file__).resolve().parent.parent / "configs"
