"""
Peak finding and localization widths on absorption maps.

- Peaks are strict interior 8-neighbor maxima, filtered by topographic
  prominence and refined with one quadratic fit on the 3x3 neighborhood.
- FWHM is measured on 1D slices through the refined peak; the half level sits
  halfway between the window floor (map minimum) and the peak height.
- "Diameter" of a localization peak is max(fwhm_x, fwhm_y).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from core.errors import HalfLevelNotBracketed, InvalidParameters
from physics.standing_wave import half_wavelength
from simulation.absorption import AbsorptionMap

logger = logging.getLogger(__name__)

DEFAULT_PROMINENCE_FRACTION = 0.05

_RING = np.ones((3, 3), dtype=bool)
_RING[1, 1] = False

# least-squares fit of f = c0 + c1 u + c2 v + c3 u^2 + c4 u v + c5 v^2 on u, v in {-1, 0, 1}
_U, _V = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], indexing="ij")
_DESIGN = np.column_stack([
    np.ones(9), _U.ravel(), _V.ravel(), _U.ravel() ** 2, (_U * _V).ravel(), _V.ravel() ** 2,
])
_FIT = np.linalg.pinv(_DESIGN)


@dataclass(frozen=True)
class Peak:
    """A refined local maximum."""

    x: float
    y: float
    height: float
    prominence: float
    i: int
    j: int

    def to_dict(self) -> Dict[str, float]:
        return {
            "x": self.x,
            "y": self.y,
            "height": self.height,
            "prominence": self.prominence,
            "node": [self.i, self.j],
        }


@dataclass(frozen=True)
class PeakReport:
    """Peaks with their FWHM diameters and the half-wavelength check."""

    peaks: List[Peak]
    fwhm: List[Tuple[Optional[float], Optional[float]]]
    half_wavelength_check: List[bool]
    half_wavelength: float
    min_prominence: float
    notes: List[Optional[str]] = field(default_factory=list)

    @property
    def peak_count(self) -> int:
        return len(self.peaks)

    def diameter(self, k: int = 0) -> Optional[float]:
        fx, fy = self.fwhm[k]
        if fx is None or fy is None:
            return None
        return max(fx, fy)

    def to_dict(self) -> Dict[str, object]:
        entries = []
        for k, peak in enumerate(self.peaks):
            fx, fy = self.fwhm[k]
            entry = peak.to_dict()
            entry.update({
                "fwhm_x": fx,
                "fwhm_y": fy,
                "diameter": self.diameter(k),
                "within_half_wavelength": self.half_wavelength_check[k],
                "note": self.notes[k] if k < len(self.notes) else None,
            })
            entries.append(entry)
        return {
            "peak_count": self.peak_count,
            "half_wavelength": self.half_wavelength,
            "min_prominence": self.min_prominence,
            "peaks": entries,
        }


# ============= PROMINENCE =============

def topographic_prominence(values: np.ndarray) -> Dict[int, float]:
    """
    Prominence of every component-founding maximum, keyed by flat index.

    Pixels are flooded from the top down (8-connectivity). When two flooded
    regions meet, the one with the lower summit dies and its prominence is its
    summit minus the meeting level. The last survivor's prominence is its summit
    minus the global minimum.
    """
    nx, ny = values.shape
    flat = values.ravel()
    order = np.argsort(-flat, kind="stable")
    parent = np.full(flat.size, -1, dtype=np.int64)
    summit: Dict[int, int] = {}
    prominence: Dict[int, float] = {}

    def find(k: int) -> int:
        root = k
        while parent[root] != root:
            root = parent[root]
        while parent[k] != root:
            parent[k], k = root, parent[k]
        return root

    for k in order:
        k = int(k)
        i, j = divmod(k, ny)
        roots = set()
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                ni, nj = i + di, j + dj
                if 0 <= ni < nx and 0 <= nj < ny:
                    n = ni * ny + nj
                    if parent[n] >= 0:
                        roots.add(find(n))
        parent[k] = k
        if not roots:
            summit[k] = k
            continue

        roots = sorted(roots, key=lambda r: (flat[summit[r]], -summit[r]), reverse=True)
        keeper = roots[0]
        for other in roots[1:]:
            dying = summit[other]
            prominence[dying] = float(flat[dying] - flat[k])
            parent[other] = keeper
        parent[k] = keeper

    floor = float(np.min(flat))
    for root, top in summit.items():
        if parent[root] == root:
            prominence[top] = float(flat[top] - floor)
    return prominence


# ============= PEAKS =============

def _refine(values: np.ndarray, i: int, j: int) -> Tuple[float, float, float]:
    """Sub-cell offsets (du, dv) in cell units and the fitted height."""
    patch = values[i - 1:i + 2, j - 1:j + 2].ravel()
    c0, c1, c2, c3, c4, c5 = _FIT @ patch
    hessian = np.array([[2 * c3, c4], [c4, 2 * c5]])
    node = float(values[i, j])

    if not (hessian[0, 0] < 0 and np.linalg.det(hessian) > 0):
        return 0.0, 0.0, node

    du, dv = np.linalg.solve(hessian, [-c1, -c2])
    du = float(np.clip(du, -1.0, 1.0))
    dv = float(np.clip(dv, -1.0, 1.0))
    fitted = float(c0 + c1 * du + c2 * dv + c3 * du * du + c4 * du * dv + c5 * dv * dv)
    return du, dv, max(fitted, node)


def find_peaks(amap: AbsorptionMap, min_prominence: float) -> List[Peak]:
    """
    Strict interior local maxima with prominence >= min_prominence, refined
    and sorted by descending height.
    """
    if not min_prominence >= 0:
        raise InvalidParameters([f"min_prominence >= 0 violated (got {min_prominence!r})"])

    values = amap.values
    nx, ny = values.shape
    if nx < 3 or ny < 3:
        return []

    neighbor_max = ndimage.maximum_filter(values, footprint=_RING, mode="nearest")
    strict = values > neighbor_max
    strict[0, :] = strict[-1, :] = False
    strict[:, 0] = strict[:, -1] = False
    if not np.any(strict):
        return []

    prominence = topographic_prominence(values)
    xs, ys = amap.axes()
    dx, dy = amap.grid.dx, amap.grid.dy

    peaks = []
    for i, j in np.argwhere(strict):
        i, j = int(i), int(j)
        prom = prominence.get(i * ny + j, 0.0)
        if prom < min_prominence:
            continue
        du, dv, height = _refine(values, i, j)
        peaks.append(Peak(
            x=float(xs[i] + du * dx),
            y=float(ys[j] + dv * dy),
            height=height,
            prominence=prom,
            i=i,
            j=j,
        ))

    peaks.sort(key=lambda pk: (-pk.height, pk.i, pk.j))
    logger.debug("found %d peak(s) with prominence >= %.3g", len(peaks), min_prominence)
    return peaks


# ============= WIDTHS =============

def _slice(values: np.ndarray, axis_nodes: np.ndarray, position: float, along_x: bool) -> np.ndarray:
    """Linear interpolation of the map on the line y = position (along_x) or x = position."""
    k = int(np.clip(np.searchsorted(axis_nodes, position, side="right") - 1, 0, axis_nodes.size - 2))
    w = (position - axis_nodes[k]) / (axis_nodes[k + 1] - axis_nodes[k])
    w = float(np.clip(w, 0.0, 1.0))
    if along_x:
        return (1 - w) * values[:, k] + w * values[:, k + 1]
    return (1 - w) * values[k, :] + w * values[k + 1, :]


def _width(profile: np.ndarray, nodes: np.ndarray, center: float, level: float, axis: str) -> float:
    start = int(np.argmin(np.abs(nodes - center)))
    if profile[start] < level:
        raise HalfLevelNotBracketed(
            f"profile along {axis} is below half level at the peak",
            {"axis": axis, "level": level},
        )

    left = start
    while left > 0 and profile[left - 1] >= level:
        left -= 1
    right = start
    while right < profile.size - 1 and profile[right + 1] >= level:
        right += 1
    if left == 0 or right == profile.size - 1:
        raise HalfLevelNotBracketed(
            f"half level {level:.6g} is not crossed along {axis} inside the window",
            {"axis": axis, "level": level},
        )

    def crossing(below: int, above: int) -> float:
        t = (level - profile[below]) / (profile[above] - profile[below])
        return float(nodes[below] + t * (nodes[above] - nodes[below]))

    return crossing(right + 1, right) - crossing(left - 1, left)


def fwhm_diameters(amap: AbsorptionMap, peak: Peak, baseline: Optional[float] = None) -> Tuple[float, float]:
    """
    Full widths at half maximum through the refined peak along x and y.

    Args:
        baseline: Floor the half level is measured from (default: map minimum)

    Raises:
        HalfLevelNotBracketed: a slice never drops below half height in the window
    """
    floor = amap.min_value if baseline is None else float(baseline)
    level = floor + 0.5 * (peak.height - floor)
    xs, ys = amap.axes()
    values = amap.values

    fwhm_x = _width(_slice(values, ys, peak.y, along_x=True), xs, peak.x, level, "x")
    fwhm_y = _width(_slice(values, xs, peak.x, along_x=False), ys, peak.y, level, "y")
    return fwhm_x, fwhm_y


def localization_report(amap: AbsorptionMap, min_prominence: Optional[float] = None) -> PeakReport:
    """
    find_peaks + fwhm_diameters + the half-wavelength test (diameter < pi/kappa1).

    Args:
        min_prominence: Absolute prominence floor (default: 5% of the map maximum)
    """
    if min_prominence is None:
        min_prominence = max(DEFAULT_PROMINENCE_FRACTION * amap.max_value, 0.0)

    peaks = find_peaks(amap, min_prominence)
    limit = half_wavelength(amap.wave)
    widths: List[Tuple[Optional[float], Optional[float]]] = []
    checks: List[bool] = []
    notes: List[Optional[str]] = []

    for peak in peaks:
        try:
            fx, fy = fwhm_diameters(amap, peak)
        except HalfLevelNotBracketed as e:
            logger.warning("peak at (%.3f, %.3f): %s", peak.x, peak.y, e.message)
            widths.append((None, None))
            checks.append(False)
            notes.append(e.message)
            continue
        widths.append((fx, fy))
        checks.append(max(fx, fy) < limit)
        notes.append(None)

    return PeakReport(
        peaks=peaks,
        fwhm=widths,
        half_wavelength_check=checks,
        half_wavelength=limit,
        min_prominence=float(min_prominence),
        notes=notes,
    )
