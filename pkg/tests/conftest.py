import math
import os
import sys

import numpy as np
import pytest

# Add repository root to path
sys.path.append(os.path.join(os.path.dirname(__file__), ".."))

from core.params import GridSpec, StandingWaveConfig, SystemParams  # noqa: E402
from simulation.absorption import AbsorptionMap  # noqa: E402


def fig2_params(theta: float = math.pi / 5, pump: float = 0.6, **changes) -> SystemParams:
    """Theta-sweep base point: Gamma=0.6, Delta_c=-10, Delta_p=0, Omega_p=0.01."""
    values = dict(
        gamma1=1.0,
        gamma2=1.0,
        pump=pump,
        delta_p=0.0,
        delta_c=-10.0,
        omega_p=0.01,
        theta=theta,
        alpha=1.0,
    )
    values.update(changes)
    return SystemParams(**values)


def synthetic_map(values: np.ndarray, grid: GridSpec) -> AbsorptionMap:
    """Wrap an arbitrary array as an AbsorptionMap for analysis tests."""
    return AbsorptionMap(grid=grid, values=values, params=fig2_params(), wave=StandingWaveConfig())


def gaussian_values(grid: GridSpec, centers, sigma: float) -> np.ndarray:
    xs, ys = grid.axes()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    values = np.zeros_like(X)
    for cx, cy in centers:
        values += np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2 * sigma ** 2))
    return values


@pytest.fixture
def params():
    return fig2_params()


@pytest.fixture
def wave():
    return StandingWaveConfig()


@pytest.fixture
def small_grid():
    return GridSpec(nx=21, ny=21)


@pytest.fixture
def fine_grid():
    return GridSpec()
