"""
Position-dependent coupling Rabi frequency of two orthogonal standing waves:

    Omega_c(x, y) = omega_c0 * [sin(kappa1*x + delta) + sin(kappa2*y + eta)]

The result is signed; downstream code uses it linearly, never |Omega_c|.
"""

import math
from typing import Tuple

import numpy as np

from core.params import GridSpec, StandingWaveConfig, require_valid_grid, require_valid_wave


def rabi_at(cfg: StandingWaveConfig, x: float, y: float) -> float:
    """Coupling Rabi frequency at one position (units of gamma, may be negative)."""
    return cfg.omega_c0 * (
        math.sin(cfg.kappa1 * x + cfg.delta_phase) + math.sin(cfg.kappa2 * y + cfg.eta_phase)
    )


def rabi_on_nodes(cfg: StandingWaveConfig, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized rabi_at over the outer product of xs and ys -> (len(xs), len(ys))."""
    sx = np.sin(cfg.kappa1 * np.asarray(xs, dtype=float) + cfg.delta_phase)
    sy = np.sin(cfg.kappa2 * np.asarray(ys, dtype=float) + cfg.eta_phase)
    return cfg.omega_c0 * (sx[:, None] + sy[None, :])


def field_on_grid(cfg: StandingWaveConfig, grid: GridSpec) -> np.ndarray:
    """
    Rabi amplitudes at every grid node; entry (i, j) is node (xs[i], ys[j]).
    Nodes are uniformly spaced and include both window endpoints.
    """
    require_valid_wave(cfg)
    require_valid_grid(grid)
    xs, ys = grid.axes()
    return rabi_on_nodes(cfg, xs, ys)


def field_period(cfg: StandingWaveConfig) -> Tuple[float, float]:
    """Spatial periods (2pi/kappa1, 2pi/kappa2) in position units."""
    return 2 * math.pi / cfg.kappa1, 2 * math.pi / cfg.kappa2


def half_wavelength(cfg: StandingWaveConfig) -> float:
    """Half of the x standing-wave period, pi/kappa1 (6 units at kappa = pi/6)."""
    return math.pi / cfg.kappa1
