import math

import numpy as np
import pytest

from conftest import fig2_params
from core.errors import InvalidParameters, NoConvergence, NonUniqueSteadyState
from core.state import CONJUGATE_SLOT, SLOT, DensityMatrix, matrix_to_vector
from physics.liouvillian import (
    SolverOptions,
    build_generator,
    build_generators,
    propagate_to_steady,
    propagate_with_stats,
    residual_norm,
    steady_state,
    steady_states,
)

R11, R22, R33 = SLOT[(0, 0)], SLOT[(1, 1)], SLOT[(2, 2)]
R23, R32 = SLOT[(1, 2)], SLOT[(2, 1)]
CONJ = np.array(CONJUGATE_SLOT)

PROPAGATION = SolverOptions(method="propagation", tol=1e-11)


def fields_off(pump: float, theta: float = math.pi / 2):
    return fig2_params(theta=theta, pump=pump, omega_p=0.0)


def random_hermitian_state(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestGenerator:
    def test_spontaneous_decay_rows(self):
        L = build_generator(fields_off(pump=0.0), 0.0)
        rate = L.apply(DensityMatrix.diagonal(1.0, 0.0, 0.0).to_vector())
        assert rate[R22] == pytest.approx(2.0)
        assert rate[R33] == pytest.approx(2.0)
        assert rate[R11] == pytest.approx(-4.0)

    def test_pump_row(self):
        L = build_generator(fields_off(pump=0.6), 0.0)
        rate = L.apply(DensityMatrix.diagonal(0.0, 0.0, 1.0).to_vector())
        assert rate[R33] == pytest.approx(-1.2)
        assert rate[R11] == pytest.approx(1.2)
        np.testing.assert_array_equal(rate[3:], 0)

    def test_sgc_source_term(self):
        L = build_generator(fields_off(pump=0.0, theta=math.pi / 5), 0.0, sgc_p=1.0)
        rate = L.apply(DensityMatrix.diagonal(1.0, 0.0, 0.0).to_vector())
        assert rate[R23] == pytest.approx(2.0)
        assert rate[R32] == pytest.approx(2.0)

    def test_no_sgc_source_for_orthogonal_dipoles(self):
        L = build_generator(fig2_params(theta=math.pi / 2), 3.0)
        assert L.matrix[R23, R11] == 0
        assert L.matrix[R32, R11] == 0

    @pytest.mark.parametrize("omega_c", [0.0, 2.5, -4.7])
    def test_trace_preserving(self, omega_c):
        L = build_generator(fig2_params(), omega_c).matrix
        population_sum = L[R11] + L[R22] + L[R33]
        assert np.max(np.abs(population_sum)) < 1e-12

    def test_conjugation_symmetry(self):
        L = build_generator(fig2_params(), 3.7).matrix
        np.testing.assert_allclose(L[np.ix_(CONJ, CONJ)], np.conj(L), atol=1e-12)

    def test_preserves_hermiticity(self):
        rng = np.random.default_rng(3)
        L = build_generator(fig2_params(), -2.1).matrix
        for _ in range(5):
            rate = L @ matrix_to_vector(random_hermitian_state(rng))
            np.testing.assert_allclose(rate[CONJ], np.conj(rate), atol=1e-12)

    def test_batched_matches_single(self):
        params = fig2_params()
        couplings = np.array([[0.0, 1.5], [-3.0, 5.0]])
        stacked = build_generators(params, couplings)
        assert stacked.shape == (2, 2, 9, 9)
        np.testing.assert_array_equal(stacked[1, 0], build_generator(params, -3.0).matrix)

    def test_invalid_params_rejected(self):
        with pytest.raises(InvalidParameters):
            build_generator(fig2_params(gamma1=-1.0), 1.0)


class TestResidual:
    def test_decay_residual(self):
        L = build_generator(fields_off(pump=0.0), 0.0)
        assert residual_norm(L, DensityMatrix.diagonal(1.0, 0.0, 0.0)) == pytest.approx(4.0)

    def test_linear_in_state(self):
        L = build_generator(fields_off(pump=0.0), 0.0)
        vector = DensityMatrix.diagonal(1.0, 0.0, 0.0).to_vector()
        assert residual_norm(L, 2 * vector) == pytest.approx(2 * residual_norm(L, vector))

    def test_accepts_matrix(self):
        L = build_generator(fields_off(pump=0.0), 0.0)
        assert residual_norm(L, np.diag([1.0, 0.0, 0.0])) == pytest.approx(4.0)


class TestSteadyState:
    def test_fields_off_trap_in_metastable_level(self):
        rho = steady_state(fields_off(pump=0.6), 0.0)
        np.testing.assert_allclose(rho.populations(), (0.0, 1.0, 0.0), atol=1e-12)
        np.testing.assert_allclose(rho.to_vector()[3:], 0, atol=1e-12)

    def test_unpumped_fields_off_is_not_unique(self):
        with pytest.raises(NonUniqueSteadyState):
            steady_state(fields_off(pump=0.0), 0.0)

    def test_stationary_and_unit_trace(self, params):
        opts = SolverOptions()
        rho = steady_state(params, 5.0, opts)
        assert residual_norm(build_generator(params, 5.0), rho) < opts.tol
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("theta", [math.pi / 12, math.pi / 5, math.pi / 2])
    @pytest.mark.parametrize("pump", [0.6, 4.0, 15.0])
    def test_positive_semidefinite(self, theta, pump):
        rho = steady_state(fig2_params(theta=theta, pump=pump), 3.3)
        assert np.min(rho.eigenvalues()) >= -1e-8

    def test_deterministic(self, params):
        a = steady_state(params, 4.2).matrix
        b = steady_state(params, 4.2).matrix
        np.testing.assert_array_equal(a, b)

    def test_batched_matches_single(self, params):
        couplings = np.array([2.5, 3.75, 5.0])
        stacked = steady_states(params, couplings)
        for k, omega_c in enumerate(couplings):
            np.testing.assert_allclose(stacked[k], steady_state(params, omega_c).to_vector(), atol=1e-14)

    def test_propagation_method(self, params):
        direct = steady_state(params, 5.0)
        propagated = steady_state(params, 5.0, PROPAGATION)
        np.testing.assert_allclose(propagated.matrix, direct.matrix, atol=1e-8)


class TestPropagation:
    def test_stationary_start_unchanged(self):
        start = DensityMatrix.diagonal(0.0, 1.0, 0.0)
        final, stats = propagate_with_stats(fields_off(pump=0.6), 0.0, start, PROPAGATION)
        np.testing.assert_array_equal(final.matrix, start.matrix)
        assert stats.steps == 0

    def test_branching_ratio(self):
        final = propagate_to_steady(fields_off(pump=0.0), 0.0, DensityMatrix.diagonal(1.0, 0.0, 0.0), PROPAGATION)
        np.testing.assert_allclose(final.populations(), (0.0, 0.5, 0.5), atol=1e-10)

    @pytest.mark.parametrize("theta,pump,omega_c", [
        (math.pi / 5, 0.6, 5.0),
        (math.pi / 12, 0.6, 3.1),
        (math.pi / 5, 12.0, -4.0),
    ])
    def test_oracle_agrees_with_direct(self, theta, pump, omega_c):
        params = fig2_params(theta=theta, pump=pump)
        start = DensityMatrix.diagonal(0.0, 1.0, 0.0)
        final, stats = propagate_with_stats(params, omega_c, start, PROPAGATION)
        np.testing.assert_allclose(final.matrix, steady_state(params, omega_c).matrix, atol=1e-8)
        assert stats.trace_drift < 1e-9

    def test_gives_up_at_max_time(self, params):
        opts = SolverOptions(method="propagation", tol=1e-11, max_time=1.0, check_every=10)
        with pytest.raises(NoConvergence):
            propagate_to_steady(params, 5.0, DensityMatrix.diagonal(0.0, 1.0, 0.0), opts)

    def test_bad_options_rejected(self, params):
        with pytest.raises(InvalidParameters):
            propagate_to_steady(params, 5.0, DensityMatrix.diagonal(0.0, 1.0, 0.0), SolverOptions(dt=-1.0))
