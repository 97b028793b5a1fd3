"""
Linear generator of the density-matrix equations and its steady state.

d/dt vec(rho) = L vec(rho), with vec ordering
    (rho11, rho22, rho33, rho12, rho21, rho13, rho31, rho23, rho32).

The rho11 row comes from trace closure rho11 + rho22 + rho33 = 1. The SGC
cross term 2 p sqrt(gamma1 gamma2) rho11 feeds both rho23 and rho32.

Because L is affine in the local coupling, L(Omega_c) = L0 + Omega_c * Lc; the
batched builders stack that form for whole grid rows.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.errors import InvalidParameters, NoConvergence, NonUniqueSteadyState
from core.params import SystemParams, require_valid
from core.state import CONJUGATE_SLOT, POPULATION_SLOTS, SLOT, DensityMatrix, matrix_to_vector

logger = logging.getLogger(__name__)

R11, R22, R33 = SLOT[(0, 0)], SLOT[(1, 1)], SLOT[(2, 2)]
R12, R21 = SLOT[(0, 1)], SLOT[(1, 0)]
R13, R31 = SLOT[(0, 2)], SLOT[(2, 0)]
R23, R32 = SLOT[(1, 2)], SLOT[(2, 1)]

_CONJ = np.array(CONJUGATE_SLOT)
_TRACE_ROW = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0], dtype=complex)


class SolverOptions(BaseModel):
    """How steady states are computed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    method: Literal["direct", "propagation"] = "direct"
    tol: float = 1e-10
    max_time: float = 2000.0
    dt: float = 1e-3
    # RK4 steps between residual checks
    check_every: int = 100
    # condition-number limit for the constrained direct solve
    cond_limit: float = 1e12


def validate_solver(opts: SolverOptions) -> List[str]:
    violations = []
    if not opts.tol > 0:
        violations.append(f"tol > 0 violated (got {opts.tol!r})")
    if not opts.dt > 0:
        violations.append(f"dt > 0 violated (got {opts.dt!r})")
    if not opts.max_time > opts.dt:
        violations.append(f"max_time > dt violated (got {opts.max_time!r})")
    if opts.check_every < 1:
        violations.append(f"check_every >= 1 violated (got {opts.check_every!r})")
    if not opts.cond_limit > 1:
        violations.append(f"cond_limit > 1 violated (got {opts.cond_limit!r})")
    return violations


@dataclass(frozen=True)
class GeneratorMatrix:
    """9x9 generator for fixed parameters and local coupling."""

    matrix: np.ndarray
    params: SystemParams
    omega_c: float

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(vector, dtype=complex)


# ============= GENERATOR =============

def _mirror_rows(matrix: np.ndarray, rows: Tuple[int, ...]) -> None:
    """Fill the conjugate partner of each listed row: L[k*, m*] = conj(L[k, m])."""
    for k in rows:
        matrix[..., _CONJ[k], _CONJ] = np.conj(matrix[..., k, :])


def _split_generator(params: SystemParams, sgc_p: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Return (L0, Lc) with L(Omega_c) = L0 + Omega_c * Lc."""
    g1, g2, pump = params.gamma1, params.gamma2, params.pump
    dp, dc, wp = params.delta_p, params.delta_c, params.omega_p
    p = params.p if sgc_p is None else sgc_p
    sgc = 2.0 * p * math.sqrt(g1 * g2)

    L0 = np.zeros((9, 9), dtype=complex)
    Lc = np.zeros((9, 9), dtype=complex)

    # rho22' = 2 g2 rho11 + i Wc (rho12 - rho21)
    L0[R22, R11] = 2 * g2
    Lc[R22, R12] = 1j
    Lc[R22, R21] = -1j

    # rho33' = 2 g1 rho11 - 2 pump rho33 + i Wp (rho13 - rho31)
    L0[R33, R11] = 2 * g1
    L0[R33, R33] = -2 * pump
    L0[R33, R13] = 1j * wp
    L0[R33, R31] = -1j * wp

    # rho12' = -(g1 + g2 + i dc) rho12 + i Wp rho32 - i Wc (rho11 - rho22)
    L0[R12, R12] = -(g1 + g2 + 1j * dc)
    L0[R12, R32] = 1j * wp
    Lc[R12, R11] = -1j
    Lc[R12, R22] = 1j

    # rho13' = -(g1 + g2 + pump + i dp) rho13 + i Wc rho23 - i Wp (rho11 - rho33)
    L0[R13, R13] = -(g1 + g2 + pump + 1j * dp)
    Lc[R13, R23] = 1j
    L0[R13, R11] = -1j * wp
    L0[R13, R33] = 1j * wp

    # rho23' = -(pump + i dp - i dc) rho23 + sgc rho11 + i Wc rho13 - i Wp rho21
    L0[R23, R23] = -(pump + 1j * dp - 1j * dc)
    L0[R23, R11] = sgc
    Lc[R23, R13] = 1j
    L0[R23, R21] = -1j * wp

    for part in (L0, Lc):
        _mirror_rows(part, (R12, R13, R23))
        # trace closure: rho11' = -(rho22' + rho33')
        part[R11, :] = -(part[R22, :] + part[R33, :])

    return L0, Lc


def build_generator(params: SystemParams, omega_c: float, *, sgc_p: Optional[float] = None) -> GeneratorMatrix:
    """
    Generator for one coupling value.

    Args:
        params: Validated system parameters
        omega_c: Local (signed) coupling Rabi frequency
        sgc_p: Override for p = cos(theta); only for probing the SGC source term

    Returns:
        GeneratorMatrix whose population rows sum to zero
    """
    require_valid(params)
    L0, Lc = _split_generator(params, sgc_p)
    return GeneratorMatrix(matrix=L0 + float(omega_c) * Lc, params=params, omega_c=float(omega_c))


def build_generators(params: SystemParams, omega_c: np.ndarray) -> np.ndarray:
    """Stacked generators, shape omega_c.shape + (9, 9)."""
    require_valid(params)
    L0, Lc = _split_generator(params)
    omega_c = np.asarray(omega_c, dtype=float)
    return L0 + omega_c[..., None, None] * Lc


def residual_norm(L: Union[GeneratorMatrix, np.ndarray], rho: Union[DensityMatrix, np.ndarray]) -> float:
    """Max-norm of L vec(rho). Accepts a DensityMatrix, a 3x3 matrix or a 9-vector."""
    matrix = L.matrix if isinstance(L, GeneratorMatrix) else np.asarray(L)
    if isinstance(rho, DensityMatrix):
        vector = rho.to_vector()
    else:
        vector = np.asarray(rho, dtype=complex)
        if vector.shape == (3, 3):
            vector = matrix_to_vector(vector)
    return float(np.max(np.abs(matrix @ vector)))


def hermitize(vector: np.ndarray) -> np.ndarray:
    """Project (..., 9) vectors onto the Hermitian subspace (real populations)."""
    vector = np.asarray(vector, dtype=complex)
    return 0.5 * (vector + np.conj(vector[..., _CONJ]))


# ============= STEADY STATE =============

def _constrained(L: np.ndarray) -> np.ndarray:
    """Replace the rho11 row by the trace row (stack-aware copy)."""
    A = np.array(L, dtype=complex, copy=True)
    A[..., R11, :] = _TRACE_ROW
    return A


def _trace_rhs(shape: Tuple[int, ...]) -> np.ndarray:
    b = np.zeros(shape + (9, 1), dtype=complex)
    b[..., R11, 0] = 1.0
    return b


def steady_states(params: SystemParams, omega_c: np.ndarray, opts: Optional[SolverOptions] = None) -> np.ndarray:
    """
    Direct constrained steady states for many couplings at once.

    Returns:
        Array omega_c.shape + (9,) of state vectors (Hermitian-projected)

    Raises:
        NonUniqueSteadyState: condition number above opts.cond_limit at any point
        NoConvergence: residual above opts.tol at any point
    """
    opts = opts or SolverOptions()
    omega_c = np.asarray(omega_c, dtype=float)
    L = build_generators(params, omega_c)
    A = _constrained(L)

    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(A)
    bad = ~np.isfinite(cond) | (cond > opts.cond_limit)
    if np.any(bad):
        first = np.argwhere(np.atleast_1d(bad))[0]
        oc = float(np.atleast_1d(omega_c)[tuple(first)])
        raise NonUniqueSteadyState(
            f"steady state not unique (condition number {float(np.atleast_1d(cond)[tuple(first)]):.3e} "
            f"exceeds {opts.cond_limit:.1e}) at omega_c={oc:.6g}",
            {"omega_c": oc},
        )

    vectors = np.linalg.solve(A, _trace_rhs(omega_c.shape))[..., 0]
    vectors = hermitize(vectors)

    residual = np.max(np.abs(np.einsum("...ij,...j->...i", L, vectors)), axis=-1)
    worst = float(np.max(residual))
    if worst > opts.tol:
        raise NoConvergence(
            f"direct solve residual {worst:.3e} exceeds tol {opts.tol:.1e}",
            {"residual": worst, "tol": opts.tol},
        )
    return vectors


def steady_state(params: SystemParams, omega_c: float, opts: Optional[SolverOptions] = None) -> DensityMatrix:
    """
    Steady state of the density-matrix equations at one coupling value.

    Uses the constrained direct solve, or RK4 propagation from rho22 = 1 when
    opts.method == "propagation".
    """
    opts = opts or SolverOptions()
    if opts.method == "propagation":
        return propagate_to_steady(params, omega_c, DensityMatrix.diagonal(0.0, 1.0, 0.0), opts)

    vector = steady_states(params, np.array(float(omega_c)), opts)
    return DensityMatrix.from_vector(vector)


# ============= PROPAGATION ORACLE =============

@dataclass(frozen=True)
class PropagationStats:
    """What a propagation run did."""

    time: float
    steps: int
    residual: float
    trace_drift: float


def rk4_step_matrix(L: np.ndarray, dt: float) -> np.ndarray:
    """
    Amplification matrix of one classical RK4 step for the linear system
    v' = L v, i.e. I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24.
    """
    identity = np.eye(L.shape[-1], dtype=complex)
    hL = dt * L
    return identity + hL @ (identity + hL @ (identity + hL @ (identity + hL / 4) / 3) / 2)


def propagate_with_stats(
    params: SystemParams,
    omega_c: float,
    rho0: DensityMatrix,
    opts: Optional[SolverOptions] = None,
) -> Tuple[DensityMatrix, PropagationStats]:
    """Fixed-step RK4 from rho0 until max|L rho| < opts.tol (checked every opts.check_every steps)."""
    opts = opts or SolverOptions(method="propagation")
    violations = validate_solver(opts)
    if violations:
        raise InvalidParameters(violations)

    generator = build_generator(params, omega_c)
    L = generator.matrix
    block = np.linalg.matrix_power(rk4_step_matrix(L, opts.dt), opts.check_every)
    block_time = opts.dt * opts.check_every
    max_blocks = int(math.ceil(opts.max_time / block_time))

    vector = rho0.to_vector()
    trace0 = np.sum(vector[list(POPULATION_SLOTS)])
    drift = 0.0
    residual = float(np.max(np.abs(L @ vector)))
    blocks = 0

    while residual >= opts.tol:
        if blocks >= max_blocks:
            raise NoConvergence(
                f"propagation residual {residual:.3e} still above tol {opts.tol:.1e} "
                f"at t={blocks * block_time:.6g}",
                {"residual": residual, "tol": opts.tol, "max_time": opts.max_time, "omega_c": float(omega_c)},
            )
        vector = block @ vector
        blocks += 1
        drift = max(drift, float(abs(np.sum(vector[list(POPULATION_SLOTS)]) - trace0)))
        residual = float(np.max(np.abs(L @ vector)))

    stats = PropagationStats(
        time=blocks * block_time,
        steps=blocks * opts.check_every,
        residual=residual,
        trace_drift=drift,
    )
    logger.debug(
        "propagation converged at t=%.4g (omega_c=%.4g, residual=%.3e, trace drift=%.3e)",
        stats.time, omega_c, stats.residual, stats.trace_drift,
    )
    return DensityMatrix.from_vector(hermitize(vector)), stats


def propagate_to_steady(
    params: SystemParams,
    omega_c: float,
    rho0: DensityMatrix,
    opts: Optional[SolverOptions] = None,
) -> DensityMatrix:
    """Time-propagation oracle for the steady state (see propagate_with_stats)."""
    state, _ = propagate_with_stats(params, omega_c, rho0, opts)
    return state
