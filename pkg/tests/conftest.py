"""Shared fixtures for the fermifield test suite."""

import numpy as np
import pytest

from fermifield.builders import bump_potential
from fermifield.grid import GridSpec
from fermifield.operators import HamiltonianSpec


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid1d():
    return GridSpec(d=1, N=32, L=2.0)


@pytest.fixture
def grid2d():
    return GridSpec(d=2, N=16, L=2.0)


@pytest.fixture
def grid3d():
    return GridSpec(d=3, N=8, L=2.0)


@pytest.fixture
def spec1d(grid1d):
    return HamiltonianSpec(grid=grid1d, h=0.5,
                           V=bump_potential(grid1d, amplitude=3.0, radius=0.6))


@pytest.fixture
def spec3d(grid3d):
    return HamiltonianSpec(grid=grid3d, h=0.6,
                           V=bump_potential(grid3d, amplitude=6.0, radius=0.7))
