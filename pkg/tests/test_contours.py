import math

import numpy as np
import pytest

from conftest import gaussian_values, synthetic_map
from analysis.contours import contour_levels, contour_polylines, innermost_contour_diameter
from analysis.peaks import Peak, find_peaks
from core.params import GridSpec

UNIT = GridSpec(xmin=0.0, xmax=1.0, ymin=0.0, ymax=1.0, nx=2, ny=2)


def saddle():
    return synthetic_map(np.array([[1.0, 0.0], [0.0, 1.0]]), UNIT)


def as_segments(contours):
    return {frozenset((round(x, 12), round(y, 12)) for x, y in line) for line in contours.polylines}


def cone(grid):
    xs, ys = grid.axes()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return synthetic_map(1.0 - np.hypot(X, Y), grid)


class TestSaddle:
    def test_center_above_level(self):
        contours = contour_polylines(saddle(), 0.4)
        assert contours.closed == [False, False]
        assert as_segments(contours) == {
            frozenset({(0.6, 0.0), (1.0, 0.4)}),
            frozenset({(0.4, 1.0), (0.0, 0.6)}),
        }

    def test_center_below_level(self):
        contours = contour_polylines(saddle(), 0.6)
        assert len(contours) == 2
        assert frozenset({(0.0, 0.4), (0.4, 0.0)}) in as_segments(contours)
        assert frozenset({(1.0, 0.6), (0.6, 1.0)}) in as_segments(contours)


class TestContourPolylines:
    def test_level_outside_range_is_empty(self):
        amap = cone(GridSpec(nx=11, ny=11))
        assert len(contour_polylines(amap, 2.0)) == 0
        assert len(contour_polylines(amap, -5.0)) == 0

    def test_constant_map_is_empty(self):
        amap = synthetic_map(np.full((5, 5), 0.3), GridSpec(nx=5, ny=5))
        contours = contour_polylines(amap, 0.3)
        assert len(contours) == 0
        assert contours.vertex_count == 0

    def test_cone_gives_one_closed_circle(self):
        grid = GridSpec(nx=41, ny=41)
        contours = contour_polylines(cone(grid), 0.0)
        assert len(contours) == 1
        assert contours.closed == [True]
        line = np.array(contours.polylines[0])
        np.testing.assert_array_equal(line[0], line[-1])
        radii = np.hypot(line[:, 0], line[:, 1])
        assert abs(radii.mean() - 1.0) < 2 * grid.dx

    def test_vertices_inside_window(self):
        grid = GridSpec(nx=41, ny=41)
        amap = synthetic_map(gaussian_values(grid, [(-1.0, 0.5), (1.2, -0.7)], 0.4), grid)
        for contours in contour_levels(amap, [0.2, 0.5, 0.9]):
            for line in contours.polylines:
                pts = np.array(line)
                assert np.all((pts[:, 0] >= grid.xmin) & (pts[:, 0] <= grid.xmax))
                assert np.all((pts[:, 1] >= grid.ymin) & (pts[:, 1] <= grid.ymax))
            assert contours.vertex_count <= 2 * (grid.nx - 1) * (grid.ny - 1) + len(contours)

    def test_open_contour_touches_boundary(self):
        grid = GridSpec(nx=21, ny=21)
        xs, _ = grid.axes()
        amap = synthetic_map(np.repeat(xs[:, None], 21, axis=1), grid)
        contours = contour_polylines(amap, 0.05)
        assert contours.closed == [False]
        pts = np.array(contours.polylines[0])
        np.testing.assert_allclose(pts[:, 0], 0.05)

    def test_levels_are_fractions_of_maximum(self):
        grid = GridSpec(nx=21, ny=21)
        amap = synthetic_map(2.0 * gaussian_values(grid, [(0.0, 0.0)], 0.5), grid)
        levels = [c.level for c in contour_levels(amap, [0.25, 0.5])]
        assert levels == pytest.approx([0.5, 1.0])

    def test_to_dict(self):
        data = contour_polylines(saddle(), 0.4).to_dict()
        assert data["level"] == 0.4
        assert [p["closed"] for p in data["polylines"]] == [False, False]


class TestInnermostContour:
    def test_gaussian_half_level_diameter(self):
        grid = GridSpec(nx=81, ny=81)
        amap = synthetic_map(gaussian_values(grid, [(0.0, 0.0)], 0.5), grid)
        peak = find_peaks(amap, 0.05)[0]
        diameter = innermost_contour_diameter(amap, peak, 0.5)
        assert diameter == pytest.approx(2 * math.sqrt(2 * math.log(2)) * 0.5, abs=0.03)

    def test_higher_level_is_tighter(self):
        grid = GridSpec(nx=81, ny=81)
        amap = synthetic_map(gaussian_values(grid, [(0.0, 0.0)], 0.5), grid)
        peak = find_peaks(amap, 0.05)[0]
        assert innermost_contour_diameter(amap, peak, 0.9) < innermost_contour_diameter(amap, peak, 0.5)

    def test_unenclosed_point(self):
        grid = GridSpec(nx=41, ny=41)
        amap = synthetic_map(gaussian_values(grid, [(0.0, 0.0)], 0.4), grid)
        outside = Peak(x=1.6, y=1.6, height=0.0, prominence=0.0, i=36, j=36)
        assert innermost_contour_diameter(amap, outside, 0.5) is None
