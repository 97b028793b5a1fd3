"""
Run configuration: TOML documents with [params], [wave], [grid], [solver],
[analysis], [output] and [sweep] sections.

All rates and detunings are in units of gamma. Angles (theta, phases, wave
vectors, sweep thetas) may be written as radians or as pi expressions such as
"pi/5"; serialization always writes plain floats.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import toml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.errors import ConfigParseError, ConfigValidationError
from core.params import (
    GridSpec,
    StandingWaveConfig,
    SystemParams,
    is_degenerate_angle,
    validate,
    validate_grid,
    validate_wave,
)
from physics.liouvillian import SolverOptions, validate_solver
from utils.helpers import parse_angle

logger = logging.getLogger(__name__)

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"

# keys whose values go through parse_angle
ANGLE_KEYS = {
    "params": ("theta",),
    "wave": ("kappa1", "kappa2", "delta_phase", "eta_phase"),
}
ANGLE_LIST_KEYS = {"sweep": ("thetas",)}


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class AnalysisSettings(_Section):
    # prominence floor as a fraction of the map maximum
    min_prominence_fraction: float = 0.05
    # contour levels as fractions of the map maximum
    contour_levels: List[float] = Field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8, 0.9])
    innermost_level: float = 0.9


class OutputSettings(_Section):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    directory: str = "output"
    stem: Optional[str] = None
    csv: bool = True
    # TOML key `json`
    emit_json: bool = Field(default=True, alias="json")
    pgm: bool = False


class SweepSettings(_Section):
    thetas: List[float] = Field(default_factory=list)
    gammas: List[float] = Field(default_factory=list)


class RunConfig(_Section):
    """Everything one command needs."""

    name: Optional[str] = None
    params: SystemParams
    wave: StandingWaveConfig = Field(default_factory=StandingWaveConfig)
    grid: GridSpec = Field(default_factory=GridSpec)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)

    @property
    def stem(self) -> str:
        return self.output.stem or self.name or "run"


# ============= PARSING =============

def _convert_angles(document: Dict[str, Any], violations: List[str]) -> Dict[str, Any]:
    converted = {k: (dict(v) if isinstance(v, dict) else v) for k, v in document.items()}
    for section, keys in ANGLE_KEYS.items():
        table = converted.get(section)
        if not isinstance(table, dict):
            continue
        for key in keys:
            if key in table:
                try:
                    table[key] = parse_angle(table[key])
                except ValueError as e:
                    violations.append(f"{section}.{key}: {e}")
    for section, keys in ANGLE_LIST_KEYS.items():
        table = converted.get(section)
        if not isinstance(table, dict):
            continue
        for key in keys:
            if isinstance(table.get(key), list):
                try:
                    table[key] = [parse_angle(v) for v in table[key]]
                except ValueError as e:
                    violations.append(f"{section}.{key}: {e}")
    return converted


def _pydantic_messages(error: ValidationError) -> List[str]:
    messages = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        messages.append(f"{location}: {item['msg']}")
    return messages


def check_config(config: RunConfig) -> List[str]:
    """Domain invariants of every section, prefixed with the section name."""
    violations = []
    violations += [f"params.{v}" for v in validate(config.params)]
    violations += [f"wave.{v}" for v in validate_wave(config.wave)]
    violations += [f"grid.{v}" for v in validate_grid(config.grid)]
    violations += [f"solver.{v}" for v in validate_solver(config.solver)]

    analysis = config.analysis
    if not 0 <= analysis.min_prominence_fraction <= 1:
        violations.append(
            f"analysis.min_prominence_fraction in [0, 1] violated (got {analysis.min_prominence_fraction!r})"
        )
    for level in analysis.contour_levels:
        if not 0 < level <= 1:
            violations.append(f"analysis.contour_levels entries in (0, 1] violated (got {level!r})")
    if not 0 < analysis.innermost_level <= 1:
        violations.append(f"analysis.innermost_level in (0, 1] violated (got {analysis.innermost_level!r})")

    for theta in config.sweep.thetas:
        if is_degenerate_angle(theta):
            violations.append(f"sweep.thetas must not contain 0 or pi (got {theta!r})")
    for gamma in config.sweep.gammas:
        if not gamma >= 0:
            violations.append(f"sweep.gammas entries >= 0 violated (got {gamma!r})")
    return violations


def parse_config(text: str, name: Optional[str] = None) -> RunConfig:
    """
    Parse and fully validate a TOML run configuration.

    Args:
        text: TOML document
        name: Default run name when the document has none

    Raises:
        ConfigParseError: malformed TOML (carries the line number)
        ConfigValidationError: unknown keys, wrong types or violated invariants
    """
    try:
        document = toml.loads(text)
    except toml.TomlDecodeError as e:
        raise ConfigParseError(f"malformed config: {e.msg}", line=e.lineno) from e

    violations: List[str] = []
    document = _convert_angles(document, violations)
    if violations:
        raise ConfigValidationError(violations)
    if name is not None:
        document.setdefault("name", name)

    try:
        config = RunConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigValidationError(_pydantic_messages(e)) from e

    violations = check_config(config)
    if violations:
        raise ConfigValidationError(violations)
    return config


def serialize_config(config: RunConfig) -> str:
    """TOML text that parse_config reads back to an identical RunConfig."""
    return toml.dumps(config.model_dump(exclude_none=True, by_alias=True))


def load_config(path: Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigParseError(f"cannot read config {path}: {e.strerror or e}") from e
    return parse_config(text, name=path.stem)


# ============= PRESETS =============

def list_presets() -> List[str]:
    """Names of the shipped presets."""
    return sorted(p.stem for p in PRESET_DIR.glob("*.toml"))


def load_preset(name: str) -> RunConfig:
    """
    Shipped preset by name, e.g. "fig2d".

    Raises:
        ConfigParseError: unknown preset name
    """
    path = PRESET_DIR / f"{name}.toml"
    if not path.is_file():
        raise ConfigParseError(
            f"unknown preset {name!r} (available: {', '.join(list_presets())})",
            key=name,
        )
    return load_config(path)
