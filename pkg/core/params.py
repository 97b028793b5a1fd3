"""
Parameter types for the three-level Lambda atom and its standing-wave drive.

Unit conventions:
- All rates and detunings are in units of gamma (gamma1 = gamma2 = 1 by default).
- gamma1, gamma2 and pump are HALF-rates: the physical decay/pump rates are
  2*gamma1, 2*gamma2 and 2*pump. The factors of 2 live in the generator.
- Positions x, y are dimensionless plot units; one field period is 2*pi/kappa.
- theta is the canonical dipole-angle input; p = cos(theta) is always derived.
"""

import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.errors import DegenerateDipoleAngle, InvalidParameters

# theta within this distance of 0 or pi (mod 2pi) counts as degenerate
ANGLE_TOLERANCE = 1e-12
ORTHOGONAL_SNAP = 1e-15


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SystemParams(_Frozen):
    """Rates, detunings and angles of the Lambda system (units of gamma)."""

    gamma1: float = 1.0
    gamma2: float = 1.0
    pump: float
    delta_p: float = 0.0
    delta_c: float
    omega_p: float
    theta: float
    alpha: float = 1.0

    @property
    def p(self) -> float:
        return p_from_theta(self.theta)


class StandingWaveConfig(_Frozen):
    """Omega_c(x, y) = omega_c0 * [sin(kappa1*x + delta) + sin(kappa2*y + eta)]."""

    omega_c0: float = 2.5
    kappa1: float = math.pi / 6
    kappa2: float = math.pi / 6
    delta_phase: float = math.pi / 2
    eta_phase: float = math.pi / 2


class GridSpec(_Frozen):
    """Rectangular window with uniformly spaced nodes, endpoints included."""

    xmin: float = -2.0
    xmax: float = 2.0
    ymin: float = -2.0
    ymax: float = 2.0
    nx: int = 201
    ny: int = 201

    @classmethod
    def default(cls) -> "GridSpec":
        return cls()

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node coordinates along x and y (linspace convention)."""
        xs = np.linspace(self.xmin, self.xmax, self.nx)
        ys = np.linspace(self.ymin, self.ymax, self.ny)
        return xs, ys

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.ymax - self.ymin) / (self.ny - 1)


# ============= DIPOLE ANGLE =============

def is_degenerate_angle(theta: float) -> bool:
    """True when theta is 0 or pi modulo 2pi (within ANGLE_TOLERANCE)."""
    reduced = math.fmod(theta, 2 * math.pi)
    if reduced < 0:
        reduced += 2 * math.pi
    return (
        reduced < ANGLE_TOLERANCE
        or abs(reduced - math.pi) < ANGLE_TOLERANCE
        or abs(reduced - 2 * math.pi) < ANGLE_TOLERANCE
    )


def p_from_theta(theta: float) -> float:
    """
    SGC alignment parameter p = cos(theta).

    Raises:
        DegenerateDipoleAngle: theta is 0 or pi (mod 2pi), where |p| = 1.
    """
    if not math.isfinite(theta) or is_degenerate_angle(theta):
        raise DegenerateDipoleAngle(
            f"dipole angle theta={theta!r} is excluded (must not be 0 or pi)",
            {"theta": theta},
        )
    p = math.cos(theta)
    # orthogonal dipoles: cos(pi/2) is ~6e-17 in floating point, not 0
    if abs(p) < ORTHOGONAL_SNAP:
        return 0.0
    return p


# ============= VALIDATION =============

def _finite(name: str, value: float, violations: List[str]) -> bool:
    if not math.isfinite(value):
        violations.append(f"{name} must be finite (got {value!r})")
        return False
    return True


def validate(params: SystemParams) -> List[str]:
    """
    Return every invariant the parameter set violates (empty when valid).
    Pure: never mutates or raises.
    """
    violations: List[str] = []

    if _finite("gamma1", params.gamma1, violations) and not params.gamma1 > 0:
        violations.append(f"gamma1 > 0 violated (got {params.gamma1!r})")
    if _finite("gamma2", params.gamma2, violations) and not params.gamma2 > 0:
        violations.append(f"gamma2 > 0 violated (got {params.gamma2!r})")
    if _finite("pump", params.pump, violations) and not params.pump >= 0:
        violations.append(f"pump >= 0 violated (got {params.pump!r})")
    _finite("delta_p", params.delta_p, violations)
    _finite("delta_c", params.delta_c, violations)
    if _finite("omega_p", params.omega_p, violations) and not params.omega_p >= 0:
        violations.append(f"omega_p >= 0 violated (got {params.omega_p!r})")
    if _finite("theta", params.theta, violations) and is_degenerate_angle(params.theta):
        violations.append(f"theta must not be 0 or pi: dipole angle degenerate (got {params.theta!r})")
    if _finite("alpha", params.alpha, violations) and not params.alpha > 0:
        violations.append(f"alpha > 0 violated (got {params.alpha!r})")

    return violations


def validate_wave(cfg: StandingWaveConfig) -> List[str]:
    """Invariant violations of a standing-wave configuration."""
    violations: List[str] = []
    for name in ("omega_c0", "kappa1", "kappa2", "delta_phase", "eta_phase"):
        _finite(name, getattr(cfg, name), violations)
    if math.isfinite(cfg.kappa1) and not cfg.kappa1 > 0:
        violations.append(f"kappa1 > 0 violated (got {cfg.kappa1!r})")
    if math.isfinite(cfg.kappa2) and not cfg.kappa2 > 0:
        violations.append(f"kappa2 > 0 violated (got {cfg.kappa2!r})")
    if math.isfinite(cfg.omega_c0) and not cfg.omega_c0 >= 0:
        violations.append(f"omega_c0 >= 0 violated (got {cfg.omega_c0!r})")
    return violations


def validate_grid(grid: GridSpec) -> List[str]:
    """Invariant violations of a grid window."""
    violations: List[str] = []
    for name in ("xmin", "xmax", "ymin", "ymax"):
        _finite(name, getattr(grid, name), violations)
    if not grid.xmax > grid.xmin:
        violations.append(f"xmax > xmin violated (got {grid.xmin!r}..{grid.xmax!r})")
    if not grid.ymax > grid.ymin:
        violations.append(f"ymax > ymin violated (got {grid.ymin!r}..{grid.ymax!r})")
    if grid.nx < 2:
        violations.append(f"nx >= 2 violated (got {grid.nx!r})")
    if grid.ny < 2:
        violations.append(f"ny >= 2 violated (got {grid.ny!r})")
    return violations


def require_valid(params: SystemParams) -> None:
    """Raise InvalidParameters listing every violation, if any."""
    violations = validate(params)
    if violations:
        raise InvalidParameters(violations)


def require_valid_wave(cfg: StandingWaveConfig) -> None:
    violations = validate_wave(cfg)
    if violations:
        raise InvalidParameters(violations)


def require_valid_grid(grid: GridSpec) -> None:
    violations = validate_grid(grid)
    if violations:
        raise InvalidParameters(violations)


def with_updates(params: SystemParams, **changes) -> SystemParams:
    """Immutable copy of params with some fields replaced (used by sweeps)."""
    return params.model_copy(update=changes)
