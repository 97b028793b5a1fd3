"""
Parameter sweeps over the dipole angle theta and the pump rate Gamma.

Each swept value produces a full absorption map and a MapSummary; summaries
keep the input order.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from tqdm import tqdm

from analysis.contours import innermost_contour_diameter
from analysis.peaks import DEFAULT_PROMINENCE_FRACTION, PeakReport, localization_report
from core.errors import InvalidParameters
from core.params import GridSpec, StandingWaveConfig, SystemParams, p_from_theta, with_updates
from physics.liouvillian import SolverOptions
from simulation.absorption import AbsorptionMap, compute_map

logger = logging.getLogger(__name__)

INNERMOST_LEVEL_FRACTION = 0.9


@dataclass(frozen=True)
class MapSummary:
    """Scalar description of one map's dominant localization peak."""

    value: Optional[float]
    peak_count: int
    peak_height: Optional[float] = None
    peak_x: Optional[float] = None
    peak_y: Optional[float] = None
    fwhm_x: Optional[float] = None
    fwhm_y: Optional[float] = None
    diameter: Optional[float] = None
    within_half_wavelength: Optional[bool] = None
    innermost_contour_diameter: Optional[float] = None

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    values: List[float]
    summaries: List[MapSummary]
    maps: List[AbsorptionMap] = field(default_factory=list, repr=False)

    @property
    def peak_heights(self) -> List[Optional[float]]:
        return [s.peak_height for s in self.summaries]

    @property
    def diameters(self) -> List[Optional[float]]:
        return [s.diameter for s in self.summaries]

    def to_dict(self) -> Dict[str, object]:
        return {
            "parameter": self.parameter,
            "values": list(self.values),
            "summaries": [s.to_dict() for s in self.summaries],
        }


def summarize_map(
    amap: AbsorptionMap,
    min_prominence_fraction: float = DEFAULT_PROMINENCE_FRACTION,
    value: Optional[float] = None,
    innermost_fraction: float = INNERMOST_LEVEL_FRACTION,
    report: Optional[PeakReport] = None,
) -> MapSummary:
    """
    Localization summary of the highest peak of a map.

    Args:
        amap: Absorption map
        min_prominence_fraction: Prominence floor as a fraction of the map maximum
        value: Swept parameter value this map belongs to
        innermost_fraction: Level (fraction of the maximum) of the innermost contour
        report: Peak report already computed for this map at the same floor

    Returns:
        MapSummary; peak fields stay None when the map has no peak
    """
    if report is None:
        report = localization_report(amap, max(min_prominence_fraction * amap.max_value, 0.0))
    if not report.peaks:
        return MapSummary(value=value, peak_count=0)

    top = report.peaks[0]
    fx, fy = report.fwhm[0]
    return MapSummary(
        value=value,
        peak_count=report.peak_count,
        peak_height=top.height,
        peak_x=top.x,
        peak_y=top.y,
        fwhm_x=fx,
        fwhm_y=fy,
        diameter=report.diameter(0),
        within_half_wavelength=report.half_wavelength_check[0],
        innermost_contour_diameter=innermost_contour_diameter(amap, top, innermost_fraction),
    )


def _sweep(
    parameter: str,
    maps_params: Sequence[SystemParams],
    values: Sequence[float],
    wave: StandingWaveConfig,
    grid: GridSpec,
    opts: Optional[SolverOptions],
    threads: int,
    min_prominence_fraction: float,
    progress: bool,
) -> SweepResult:
    summaries: List[MapSummary] = []
    maps: List[AbsorptionMap] = []
    for params, value in tqdm(
        list(zip(maps_params, values)),
        desc=f"sweep {parameter}",
        unit="map",
        disable=not progress,
    ):
        amap = compute_map(params, wave, grid, opts, threads)
        summary = summarize_map(amap, min_prominence_fraction, value=value)
        logger.info(
            "%s=%.6g: %d peak(s), height %s",
            parameter, value, summary.peak_count,
            "n/a" if summary.peak_height is None else f"{summary.peak_height:.4g}",
        )
        maps.append(amap)
        summaries.append(summary)
    return SweepResult(parameter=parameter, values=[float(v) for v in values], summaries=summaries, maps=maps)


def sweep_theta(
    base_params: SystemParams,
    wave: StandingWaveConfig,
    grid: GridSpec,
    thetas: Sequence[float],
    opts: Optional[SolverOptions] = None,
    threads: int = 1,
    min_prominence_fraction: float = DEFAULT_PROMINENCE_FRACTION,
    progress: bool = False,
) -> SweepResult:
    """
    One map per dipole angle, all other parameters from base_params.

    Raises:
        DegenerateDipoleAngle: some theta is 0 or pi (checked before any map runs)
    """
    thetas = [float(t) for t in thetas]
    if not thetas:
        raise InvalidParameters(["thetas must not be empty"])
    for theta in thetas:
        p_from_theta(theta)
    params = [with_updates(base_params, theta=t) for t in thetas]
    return _sweep("theta", params, thetas, wave, grid, opts, threads, min_prominence_fraction, progress)


def sweep_gamma(
    base_params: SystemParams,
    wave: StandingWaveConfig,
    grid: GridSpec,
    gammas: Sequence[float],
    opts: Optional[SolverOptions] = None,
    threads: int = 1,
    min_prominence_fraction: float = DEFAULT_PROMINENCE_FRACTION,
    progress: bool = False,
) -> SweepResult:
    """
    One map per incoherent pump rate Gamma (units of gamma).

    Raises:
        InvalidParameters: some Gamma is negative or not finite
    """
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise InvalidParameters(["gammas must not be empty"])
    bad = [g for g in gammas if not (math.isfinite(g) and g >= 0)]
    if bad:
        raise InvalidParameters([f"pump >= 0 violated (got {g!r})" for g in bad])
    params = [with_updates(base_params, pump=g) for g in gammas]
    return _sweep("pump", params, gammas, wave, grid, opts, threads, min_prominence_fraction, progress)
