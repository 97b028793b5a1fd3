"""
Iso-level contour polylines of absorption maps (marching squares).

Cell (i, j) spans nodes (i, j)..(i+1, j+1). Corners are numbered
c0=(i,j), c1=(i+1,j), c2=(i+1,j+1), c3=(i,j+1); a corner is "above" when its
value is strictly greater than the level. Saddle cells are split by comparing
the mean of the four corners to the level.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from analysis.peaks import Peak
from simulation.absorption import AbsorptionMap

logger = logging.getLogger(__name__)

Vertex = Tuple[float, float]
EdgeKey = Tuple[str, int, int]

# edge ids: 0 bottom (c0-c1), 1 right (c1-c2), 2 top (c3-c2), 3 left (c0-c3)
_SEGMENTS: Dict[int, List[Tuple[int, int]]] = {
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(0, 2)],
    11: [(1, 2)],
    12: [(3, 1)],
    13: [(0, 1)],
    14: [(3, 0)],
}
_SADDLE_CENTER_ABOVE = {5: [(0, 1), (2, 3)], 10: [(3, 0), (1, 2)]}
_SADDLE_CENTER_BELOW = {5: [(3, 0), (1, 2)], 10: [(0, 1), (2, 3)]}


@dataclass(frozen=True)
class ContourSet:
    """Polylines at one level; closed polylines repeat their first vertex at the end."""

    level: float
    polylines: List[List[Vertex]] = field(default_factory=list)
    closed: List[bool] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.polylines)

    @property
    def vertex_count(self) -> int:
        return sum(len(line) for line in self.polylines)

    def to_dict(self) -> Dict[str, object]:
        return {
            "level": self.level,
            "polylines": [
                {"closed": closed, "vertices": [list(v) for v in line]}
                for line, closed in zip(self.polylines, self.closed)
            ],
        }


def _edge_key(i: int, j: int, edge: int) -> EdgeKey:
    if edge == 0:
        return ("h", i, j)
    if edge == 1:
        return ("v", i + 1, j)
    if edge == 2:
        return ("h", i, j + 1)
    return ("v", i, j)


def _vertex(key: EdgeKey, values: np.ndarray, xs: np.ndarray, ys: np.ndarray, level: float) -> Vertex:
    kind, i, j = key
    a = values[i, j]
    if kind == "h":
        b = values[i + 1, j]
        t = (level - a) / (b - a)
        return (float(xs[i] + t * (xs[i + 1] - xs[i])), float(ys[j]))
    b = values[i, j + 1]
    t = (level - a) / (b - a)
    return (float(xs[i]), float(ys[j] + t * (ys[j + 1] - ys[j])))


def _cell_segments(values: np.ndarray, level: float) -> List[Tuple[EdgeKey, EdgeKey]]:
    above = values > level
    case = (
        above[:-1, :-1].astype(np.int8)
        | (above[1:, :-1].astype(np.int8) << 1)
        | (above[1:, 1:].astype(np.int8) << 2)
        | (above[:-1, 1:].astype(np.int8) << 3)
    )

    segments: List[Tuple[EdgeKey, EdgeKey]] = []
    for i, j in np.argwhere((case != 0) & (case != 15)):
        i, j = int(i), int(j)
        c = int(case[i, j])
        if c in (5, 10):
            mean = 0.25 * (values[i, j] + values[i + 1, j] + values[i + 1, j + 1] + values[i, j + 1])
            pairs = _SADDLE_CENTER_ABOVE[c] if mean > level else _SADDLE_CENTER_BELOW[c]
        else:
            pairs = _SEGMENTS[c]
        for a, b in pairs:
            segments.append((_edge_key(i, j, a), _edge_key(i, j, b)))
    return segments


def _chain(segments: Sequence[Tuple[EdgeKey, EdgeKey]]) -> List[Tuple[List[EdgeKey], bool]]:
    """Join segments that share an edge crossing into open chains and cycles."""
    neighbors: Dict[EdgeKey, List[EdgeKey]] = {}
    for a, b in segments:
        neighbors.setdefault(a, []).append(b)
        neighbors.setdefault(b, []).append(a)

    visited = set()
    chains: List[Tuple[List[EdgeKey], bool]] = []

    def walk(start: EdgeKey) -> List[EdgeKey]:
        path = [start]
        visited.add(start)
        current = start
        while True:
            nxt = [n for n in neighbors[current] if n not in visited]
            if not nxt:
                return path
            current = nxt[0]
            visited.add(current)
            path.append(current)

    # open chains start at window-boundary crossings
    for key in sorted(k for k, ns in neighbors.items() if len(ns) == 1):
        if key not in visited:
            chains.append((walk(key), False))

    for key in sorted(neighbors):
        if key not in visited:
            path = walk(key)
            path.append(path[0])
            chains.append((path, True))
    return chains


def contour_polylines(amap: AbsorptionMap, level: float) -> ContourSet:
    """
    Marching-squares polylines of the map at `level`.

    Returns an empty ContourSet when the level is outside the value range.
    """
    values = amap.values
    level = float(level)
    if not (amap.min_value <= level <= amap.max_value):
        return ContourSet(level=level)

    xs, ys = amap.axes()
    chains = _chain(_cell_segments(values, level))

    polylines = []
    closed = []
    for keys, is_closed in chains:
        polylines.append([_vertex(k, values, xs, ys, level) for k in keys])
        closed.append(is_closed)

    logger.debug("level %.4g: %d polyline(s)", level, len(polylines))
    return ContourSet(level=level, polylines=polylines, closed=closed)


def contour_levels(amap: AbsorptionMap, fractions: Sequence[float]) -> List[ContourSet]:
    """Contours at fractions of the map maximum."""
    return [contour_polylines(amap, f * amap.max_value) for f in fractions]


# ============= INNERMOST CONTOUR =============

def _encloses(polyline: Sequence[Vertex], x: float, y: float) -> bool:
    """Even-odd ray test against a closed polyline."""
    pts = np.asarray(polyline, dtype=float)
    x0, y0 = pts[:-1, 0], pts[:-1, 1]
    x1, y1 = pts[1:, 0], pts[1:, 1]
    straddles = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross_x = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return bool(np.count_nonzero(straddles & (x < cross_x)) % 2)


def innermost_contour_diameter(
    amap: AbsorptionMap,
    peak: Peak,
    level_fraction: float,
) -> Optional[float]:
    """
    Largest vertex-to-vertex distance of the closed contour around `peak` at
    level_fraction * max(map). None when no closed contour encloses the peak.
    """
    contours = contour_polylines(amap, level_fraction * amap.max_value)
    best: Optional[float] = None
    for line, is_closed in zip(contours.polylines, contours.closed):
        if not is_closed or len(line) < 4 or not _encloses(line, peak.x, peak.y):
            continue
        extent = float(np.max(pdist(np.asarray(line[:-1]))))
        # nested loops around the same peak: keep the tightest
        if best is None or extent < best:
            best = extent
    return best
