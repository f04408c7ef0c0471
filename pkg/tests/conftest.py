"""Shared grids and fields for the test suite."""

import pytest

from src.core.catalog import sample_catalog
from src.core.grid import Grid


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: refinement runs on finer grids")


@pytest.fixture(scope="session")
def grid2():
    """[-2, 2]^2 with h = 1/16."""
    return Grid.from_box(2, 64)


@pytest.fixture(scope="session")
def grid2_fine():
    """[-2, 2]^2 with h = 1/32."""
    return Grid.from_box(2, 128)


@pytest.fixture(scope="session")
def grid2_small():
    """17 x 17 nodes, small enough for the direct reference path."""
    return Grid.from_box(2, 16)


@pytest.fixture(scope="session")
def grid3_small():
    return Grid.from_box(3, 24)


@pytest.fixture
def gaussian2(grid2):
    return sample_catalog("gaussian", {"sigma": 1.0}, grid2)


@pytest.fixture
def disk_fine(grid2_fine):
    return sample_catalog("ball_indicator", {"radius": 1.0}, grid2_fine)
