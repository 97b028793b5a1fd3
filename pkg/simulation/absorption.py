"""
Probe absorption chi'' = alpha * Im[rho13 / Omega_p] at a point and over grids.

Every node is an independent steady-state solve of the full equations; the
closed forms in physics.analytic are only used for cross-checks. Grid rows are
solved as stacked numpy systems, optionally spread over joblib threads; the
per-node arithmetic does not depend on the worker count.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed

from core.errors import GridPointError, InvalidParameters, LocalizationError
from core.params import (
    GridSpec,
    StandingWaveConfig,
    SystemParams,
    require_valid,
    require_valid_grid,
    require_valid_wave,
)
from core.state import SLOT, DensityMatrix
from physics.liouvillian import SolverOptions, steady_state, steady_states
from physics.standing_wave import rabi_at, rabi_on_nodes

logger = logging.getLogger(__name__)

R13 = SLOT[(0, 2)]


@dataclass(frozen=True)
class AbsorptionMap:
    """chi'' on a grid; values[i, j] belongs to node (xs[i], ys[j])."""

    grid: GridSpec
    values: np.ndarray
    params: SystemParams
    wave: StandingWaveConfig
    dispersion: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.nx, self.grid.ny):
            raise InvalidParameters(
                [f"map shape {values.shape} does not match grid ({self.grid.nx}, {self.grid.ny})"]
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameters(["map values must be finite"])
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def axes(self):
        return self.grid.axes()

    @property
    def max_value(self) -> float:
        return float(np.max(self.values))

    @property
    def min_value(self) -> float:
        return float(np.min(self.values))

    def transposed(self) -> "AbsorptionMap":
        """Same map with the roles of x and y swapped."""
        g = self.grid
        grid = GridSpec(xmin=g.ymin, xmax=g.ymax, ymin=g.xmin, ymax=g.xmax, nx=g.ny, ny=g.nx)
        wave = StandingWaveConfig(
            omega_c0=self.wave.omega_c0,
            kappa1=self.wave.kappa2,
            kappa2=self.wave.kappa1,
            delta_phase=self.wave.eta_phase,
            eta_phase=self.wave.delta_phase,
        )
        dispersion = None if self.dispersion is None else self.dispersion.T
        return AbsorptionMap(grid=grid, values=self.values.T, params=self.params, wave=wave, dispersion=dispersion)


def _require_probe(params: SystemParams) -> None:
    require_valid(params)
    if not params.omega_p > 0:
        raise InvalidParameters([f"omega_p > 0 required for chi'' (got {params.omega_p!r})"])


def chi_from_state(params: SystemParams, state: DensityMatrix) -> float:
    return params.alpha * (state.element(1, 3) / params.omega_p).imag


def chi_at(
    params: SystemParams,
    wave: StandingWaveConfig,
    x: float,
    y: float,
    opts: Optional[SolverOptions] = None,
) -> float:
    """
    Probe absorption at one position.

    Returns:
        alpha * Im[rho13 / Omega_p] with rho13 from the local steady state
    """
    _require_probe(params)
    require_valid_wave(wave)
    state = steady_state(params, rabi_at(wave, x, y), opts)
    return chi_from_state(params, state)


# ============= GRID SOLVES =============

def _solve_row(
    params: SystemParams,
    omega_row: np.ndarray,
    x: float,
    ys: np.ndarray,
    opts: SolverOptions,
) -> np.ndarray:
    """State vectors for one x-row, shape (ny, 9). Failures carry the node position."""
    if opts.method == "direct":
        try:
            return steady_states(params, omega_row, opts)
        except LocalizationError:
            # locate the first failing node for the error report
            for j, omega in enumerate(omega_row):
                try:
                    steady_states(params, np.array(omega), opts)
                except LocalizationError as e:
                    raise GridPointError(x, ys[j], e) from e
            raise

    rows = []
    for j, omega in enumerate(omega_row):
        try:
            rows.append(steady_state(params, float(omega), opts).to_vector())
        except LocalizationError as e:
            raise GridPointError(x, ys[j], e) from e
    return np.array(rows)


def compute_states(
    params: SystemParams,
    wave: StandingWaveConfig,
    grid: GridSpec,
    opts: Optional[SolverOptions] = None,
    threads: int = 1,
) -> np.ndarray:
    """Steady-state vectors at every node, shape (nx, ny, 9)."""
    require_valid(params)
    require_valid_wave(wave)
    require_valid_grid(grid)
    opts = opts or SolverOptions()

    xs, ys = grid.axes()
    omega = rabi_on_nodes(wave, xs, ys)
    rows: List[np.ndarray] = Parallel(n_jobs=max(1, int(threads)), prefer="threads")(
        delayed(_solve_row)(params, omega[i], float(xs[i]), ys, opts) for i in range(grid.nx)
    )
    return np.stack(rows)


def compute_map(
    params: SystemParams,
    wave: StandingWaveConfig,
    grid: GridSpec,
    opts: Optional[SolverOptions] = None,
    threads: int = 1,
) -> AbsorptionMap:
    """
    chi'' at every node of the grid.

    Raises:
        GridPointError: a node's solve failed (carries that node's x, y)
    """
    _require_probe(params)
    states = compute_states(params, wave, grid, opts, threads)
    response = states[..., R13] / params.omega_p
    logger.debug(
        "computed %dx%d map (theta=%.4g, pump=%.4g, threads=%d)",
        grid.nx, grid.ny, params.theta, params.pump, threads,
    )
    return AbsorptionMap(
        grid=grid,
        values=params.alpha * response.imag,
        params=params,
        wave=wave,
        dispersion=params.alpha * response.real,
    )
