import math

import numpy as np
import pytest

from conftest import fig2_params
from core.errors import GridPointError, InvalidParameters, NonUniqueSteadyState
from core.params import GridSpec, StandingWaveConfig
from physics.liouvillian import SolverOptions
from simulation import absorption
from simulation.absorption import AbsorptionMap, chi_at, compute_map, compute_states
from simulation.validation import physicality_check, sample_oracle_points, symmetry_check, vanishing_checks

TINY = GridSpec(nx=9, ny=9)


@pytest.fixture(scope="module")
def fig2_map():
    return compute_map(fig2_params(), StandingWaveConfig(), TINY)


class TestChiAt:
    def test_matches_map_node(self, fig2_map, wave):
        xs, ys = TINY.axes()
        for i, j in [(0, 0), (4, 4), (2, 7)]:
            value = chi_at(fig2_map.params, wave, float(xs[i]), float(ys[j]))
            assert value == pytest.approx(fig2_map.values[i, j], rel=1e-9, abs=1e-12)

    def test_zero_probe_rejected(self, wave):
        with pytest.raises(InvalidParameters):
            chi_at(fig2_params(omega_p=0.0), wave, 0.0, 0.0)

    def test_alpha_scales_linearly(self, wave):
        base = chi_at(fig2_params(), wave, 0.5, -0.3)
        doubled = chi_at(fig2_params(alpha=2.0), wave, 0.5, -0.3)
        assert doubled == 2.0 * base

    def test_probe_linear_for_orthogonal_dipoles(self, wave):
        strong = chi_at(fig2_params(theta=math.pi / 2), wave, 0.0, 0.0)
        weak = chi_at(fig2_params(theta=math.pi / 2, omega_p=0.001), wave, 0.0, 0.0)
        assert strong != 0
        assert abs(weak - strong) / abs(strong) < 0.01

    def test_propagation_agrees_with_direct(self, wave):
        opts = SolverOptions(method="propagation", tol=1e-11)
        params = fig2_params(pump=4.0)
        assert chi_at(params, wave, 0.7, 0.2, opts) == pytest.approx(chi_at(params, wave, 0.7, 0.2), abs=1e-6)


class TestComputeMap:
    def test_shape_and_dispersion(self, fig2_map):
        assert fig2_map.values.shape == (9, 9)
        assert fig2_map.dispersion.shape == (9, 9)
        assert np.all(np.isfinite(fig2_map.values))

    def test_values_read_only(self, fig2_map):
        with pytest.raises(ValueError):
            fig2_map.values[0, 0] = 1.0

    def test_transpose_symmetric(self, fig2_map):
        np.testing.assert_allclose(fig2_map.values, fig2_map.values.T, atol=1e-8)

    def test_translation_by_one_period(self, fig2_map):
        report = symmetry_check(fig2_map)
        assert report["translation_period_x"] == pytest.approx(12.0)
        assert report["translation_defect"] < 1e-8
        assert report["passed"]

    def test_alpha_doubles_map(self, wave):
        one = compute_map(fig2_params(), wave, GridSpec(nx=5, ny=5))
        two = compute_map(fig2_params(alpha=2.0), wave, GridSpec(nx=5, ny=5))
        np.testing.assert_array_equal(two.values, 2.0 * one.values)

    def test_thread_count_does_not_change_values(self, wave):
        grid = GridSpec(nx=7, ny=5)
        serial = compute_map(fig2_params(), wave, grid, threads=1)
        threaded = compute_map(fig2_params(), wave, grid, threads=3)
        np.testing.assert_array_equal(serial.values, threaded.values)

    def test_deterministic(self, fig2_map, wave):
        again = compute_map(fig2_map.params, wave, TINY)
        np.testing.assert_array_equal(again.values, fig2_map.values)

    def test_zero_probe_rejected(self, wave):
        with pytest.raises(InvalidParameters):
            compute_map(fig2_params(omega_p=0.0), wave, TINY)

    def test_bad_grid_rejected(self, wave):
        with pytest.raises(InvalidParameters):
            compute_map(fig2_params(), wave, GridSpec(nx=1, ny=4))

    def test_states_are_physical(self, wave):
        states = compute_states(fig2_params(pump=12.0), wave, GridSpec(nx=5, ny=5))
        assert states.shape == (5, 5, 9)
        assert physicality_check(states)["passed"]

    def test_failing_node_reports_position(self, wave, monkeypatch):
        def refuse(params, omega_c, opts=None):
            raise NonUniqueSteadyState("forced", {})

        monkeypatch.setattr(absorption, "steady_states", refuse)
        with pytest.raises(GridPointError) as info:
            compute_map(fig2_params(), wave, GridSpec(nx=3, ny=3))
        assert (info.value.x, info.value.y) == (-2.0, -2.0)
        assert info.value.to_dict()["cause"]["error"] == "non_unique_steady_state"


class TestAbsorptionMap:
    def test_shape_checked(self, wave):
        with pytest.raises(InvalidParameters):
            AbsorptionMap(grid=TINY, values=np.zeros((3, 3)), params=fig2_params(), wave=wave)

    def test_non_finite_rejected(self, wave):
        values = np.zeros((9, 9))
        values[2, 2] = np.nan
        with pytest.raises(InvalidParameters):
            AbsorptionMap(grid=TINY, values=values, params=fig2_params(), wave=wave)

    def test_transposed_swaps_axes(self, wave):
        grid = GridSpec(xmin=0.0, xmax=1.0, ymin=-3.0, ymax=3.0, nx=2, ny=3)
        values = np.arange(6.0).reshape(2, 3)
        flipped = AbsorptionMap(grid=grid, values=values, params=fig2_params(), wave=wave).transposed()
        assert (flipped.grid.nx, flipped.grid.ny) == (3, 2)
        assert flipped.grid.xmin == -3.0
        np.testing.assert_array_equal(flipped.values, values.T)


class TestClosedFormChecks:
    def test_vanishing_checks_pass(self):
        report = vanishing_checks(fig2_params())
        assert report["passed"]
        assert report["orthogonal_sgc_term_is_zero"]

    def test_vanishing_checks_without_pump(self):
        assert not vanishing_checks(fig2_params(pump=0.0))["passed"]

    def test_oracle_samples_are_seeded(self):
        a = sample_oracle_points(fig2_params(), count=5, seed=0)
        b = sample_oracle_points(fig2_params(), count=5, seed=0)
        assert [(p.theta, p.pump, w) for p, w in a] == [(p.theta, p.pump, w) for p, w in b]
        assert all(2.5 <= abs(w) <= 5.0 for _, w in a)
        assert all(math.pi / 12 <= p.theta <= math.pi / 5 for p, _ in a)
