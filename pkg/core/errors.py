"""
Error hierarchy for the atom localization simulator.
Every failure a command can hit maps to one of these, and each one knows how
to describe itself as a plain dict for the CLI's error.json.
"""

from typing import Any, Dict, List, Optional


class LocalizationError(Exception):
    """Base class for all simulator errors."""

    code = "localization_error"

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.code,
            "message": self.message,
            "context": self.context,
        }


# ============= PARAMETERS =============

class InvalidParameters(LocalizationError):
    """Raised when a parameter set violates one or more invariants."""

    code = "invalid_parameters"

    def __init__(self, violations: List[str], context: Optional[Dict[str, Any]] = None):
        self.violations = list(violations)
        super().__init__("invalid parameters: " + "; ".join(self.violations), context)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["violations"] = self.violations
        return data


class DegenerateDipoleAngle(LocalizationError):
    """theta is 0 or pi (mod 2pi), so the SGC parameter p = cos(theta) is excluded."""

    code = "degenerate_dipole_angle"


# ============= SOLVERS =============

class NonUniqueSteadyState(LocalizationError):
    """The trace-constrained generator is rank deficient beyond tolerance."""

    code = "non_unique_steady_state"


class NoConvergence(LocalizationError):
    """A steady-state computation did not reach the requested residual."""

    code = "no_convergence"


class SingularDenominator(LocalizationError):
    """A printed closed-form denominator vanished."""

    code = "singular_denominator"


class GridPointError(LocalizationError):
    """A per-node solve failed while computing an absorption map."""

    code = "grid_point_error"

    def __init__(self, x: float, y: float, cause: LocalizationError):
        self.x = float(x)
        self.y = float(y)
        self.cause = cause
        super().__init__(
            f"solve failed at node (x={self.x:.6g}, y={self.y:.6g}): {cause.message}",
            {"x": self.x, "y": self.y},
        )

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["cause"] = self.cause.to_dict()
        return data


# ============= ANALYSIS =============

class HalfLevelNotBracketed(LocalizationError):
    """A slice through a peak never drops below half height inside the window."""

    code = "half_level_not_bracketed"


# ============= CONFIG / IO =============

class ConfigParseError(LocalizationError):
    """The config document is not well-formed."""

    code = "config_parse_error"

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        context: Dict[str, Any] = {}
        if line is not None:
            context["line"] = line
        if key is not None:
            context["key"] = key
        super().__init__(message, context)


class ConfigValidationError(LocalizationError):
    """The config parsed but violates invariants (or carries unknown keys)."""

    code = "config_validation_error"

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("invalid config: " + "; ".join(self.violations))

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["violations"] = self.violations
        return data


class OutputError(LocalizationError):
    """An output file could not be written."""

    code = "output_error"

    def __init__(self, path: str, reason: str):
        self.path = str(path)
        super().__init__(f"cannot write {self.path}: {reason}", {"path": self.path})


class DegenerateRange(UserWarning):
    """A heatmap has max == min; it is rendered as uniform mid-gray."""
