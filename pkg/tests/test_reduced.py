"""
Tests for the reduced dynamics, its spectral analysis and the asymptotic
state.
"""

import numpy as np
import pytest

import numerics
import reduced
from errors import NotErgodic, NumericalFailure
from numerics import opnorm
from reduced import InstantObservable
from sforacle import spinspin_oracle
from tests.conftest import (
    BENCHMARK, BENCHMARK_ALPHA1, BENCHMARK_ALPHA2, BENCHMARK_GAMMA0, GROUND,
    benchmark_model, random_hermitian, random_model,
)
from tolerances import Tolerances

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


class TestReducedMap:
    def test_uncoupled_map_is_system_rotation(self, free_model):
        m = reduced.reduced_map(free_model)
        expected = np.diag(np.exp(1j * free_model.tau * np.diag(free_model.sys_s.liouvillean).real))
        assert np.allclose(m, expected)
        values = sorted(np.round(numerics.eigenvalues(m), 10), key=lambda z: z.imag)
        assert np.allclose(values, [np.exp(-1j), 1, 1, np.exp(1j)])

    def test_fixes_reference_vector_for_random_models(self, rng):
        for _ in range(50):
            model = random_model(rng, d_s=int(rng.integers(1, 4)), d_e=int(rng.integers(1, 3)),
                                 lam=float(rng.uniform(-1, 1)), tau=float(rng.uniform(0.2, 2)))
            m = reduced.reduced_map(model)
            assert np.linalg.norm(m @ model.omega_s - model.omega_s) <= 1e-10

    def test_broken_fixed_point_is_numerical_failure(self, medium_model):
        with pytest.raises(NumericalFailure, match="does not fix Omega_S"):
            reduced.reduced_map(medium_model, tol=Tolerances(fixed_point=-1.0))

    def test_weak_coupling_unit_distance_eigenvalue(self):
        lam = 0.01
        model = benchmark_model(lam)
        data = reduced.analyze_model(model)
        oracle = spinspin_oracle(BENCHMARK['e_s'], BENCHMARK['e_e'], BENCHMARK['beta_e'], BENCHMARK['tau'],
                                 lam, [[0, 1], [1, 0]])
        others = [z for z in data.eigenvalues if abs(z - 1) > 1e-8]
        real_axis = min(others, key=lambda z: abs(z - oracle.e0))
        assert abs(real_axis - oracle.e0) <= 1e-7


class TestSpectralAnalysis:
    def test_scalar_identity_is_ergodic(self):
        data = reduced.spectral_analysis(np.eye(1), np.ones(1))
        assert data.ergodic
        assert data.gamma == np.inf

    def test_peripheral_eigenvalue(self):
        m = np.diag([1.0, np.exp(0.7j)])
        with pytest.raises(NotErgodic) as excinfo:
            reduced.spectral_analysis(m, np.array([1.0, 0.0]))
        assert excinfo.value.reason == 'peripheral-eigenvalue'

    def test_missing_unit_eigenvalue_is_numerical_failure(self):
        with pytest.raises(NumericalFailure, match="no eigenvalue 1"):
            reduced.spectral_analysis(np.diag([0.5, 0.2]), np.array([1.0, 0.0]))

    def test_degenerate_one(self, free_model):
        with pytest.raises(NotErgodic) as excinfo:
            reduced.analyze_model(free_model)
        assert excinfo.value.reason == 'degenerate-one'
        data = reduced.analyze_model(free_model, strict=False)
        assert not data.ergodic and data.omega_star is None

    def test_benchmark_is_ergodic_with_gap(self, medium_model):
        data = reduced.analyze_model(medium_model)
        assert data.ergodic
        assert data.gamma > 0
        assert np.max(np.abs(data.eigenvalues)) <= 1 + 1e-8
        assert np.isclose(np.vdot(data.omega_star, data.omega_s), 1)
        assert np.allclose(data.pi_projection @ data.pi_projection, data.pi_projection, atol=1e-10)

    def test_gap_follows_weak_coupling_law(self, weak_data):
        assert weak_data.gamma == pytest.approx(BENCHMARK_GAMMA0 * 0.05**2, rel=0.3)

    def test_to_dict_encodes_pairs(self, medium_model):
        out = reduced.analyze_model(medium_model).to_dict()
        assert out['ergodic'] is True
        assert all(len(pair) == 2 for pair in out['eigenvalues'])
        assert len(out['omega_star']) == 4


class TestAsymptoticState:
    def test_normalization_and_hermiticity(self, rng, strong_data):
        assert reduced.asymptotic_expectation(strong_data, np.eye(2)) == pytest.approx(1, abs=1e-10)
        a = random_hermitian(rng, 2)
        assert abs(reduced.asymptotic_expectation(strong_data, a).imag) <= 1e-9

    def test_positivity(self, rng, strong_data):
        for _ in range(100):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            assert reduced.asymptotic_expectation(strong_data, a.conj().T @ a).real >= -1e-9

    def test_ground_population_at_weak_coupling(self, weak_data):
        expected = BENCHMARK_ALPHA1 / (BENCHMARK_ALPHA1 + BENCHMARK_ALPHA2)
        value = reduced.asymptotic_expectation(weak_data, GROUND).real
        assert value == pytest.approx(0.582, abs=0.01)
        assert value == pytest.approx(expected, abs=0.01)

    def test_density_matches_functional(self, rng, strong_data):
        rho = reduced.asymptotic_density(strong_data)
        assert np.trace(rho) == pytest.approx(1)
        for _ in range(5):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            assert np.isclose(np.trace(rho @ a), reduced.asymptotic_expectation(strong_data, a))

    def test_independent_of_system_reference(self):
        densities = [reduced.asymptotic_density(reduced.analyze_model(benchmark_model(0.6, beta_s=beta_s)))
                     for beta_s in (0.0, 0.5, 1.0)]
        for rho in densities[1:]:
            assert np.allclose(rho, densities[0], atol=1e-9)

    def test_non_ergodic_refused(self, free_model):
        data = reduced.analyze_model(free_model, strict=False)
        with pytest.raises(NotErgodic):
            reduced.asymptotic_expectation(data, GROUND)


class TestRiasExpectation:
    def test_identity_chain_reduces_to_asymptotic_state(self, strong_model, strong_data):
        obs = InstantObservable(a_s=GROUND, b_zero=np.eye(2))
        expected = reduced.asymptotic_expectation(strong_data, GROUND)
        assert reduced.rias_expectation(strong_model, strong_data, obs, 0.0) == pytest.approx(expected, abs=1e-10)

    def test_future_factor_gives_reference_expectation(self, strong_model, strong_data):
        beta, e_e = BENCHMARK['beta_e'], BENCHMARK['e_e']
        obs = InstantObservable(a_s=np.eye(2), b_zero=np.eye(2), b_future=[GROUND])
        value = reduced.rias_expectation(strong_model, strong_data, obs, 0.3)
        assert value == pytest.approx(1 / (1 + np.exp(-beta * e_e)), abs=1e-10)

    def test_nontrivial_periodicity(self, strong_model, strong_data):
        obs = InstantObservable(a_s=SIGMA_Z, b_zero=GROUND)
        start = reduced.rias_expectation(strong_model, strong_data, obs, 0.0)
        middle = reduced.rias_expectation(strong_model, strong_data, obs, 0.5 * strong_model.tau)
        assert abs(start - middle) > 1e-4

    def test_repeatable(self, strong_model, strong_data):
        obs = InstantObservable(a_s=SIGMA_Z, b_past=[GROUND], b_zero=GROUND)
        first = reduced.rias_expectation(strong_model, strong_data, obs, 0.4)
        second = reduced.rias_expectation(strong_model, strong_data, obs, 0.4)
        assert first == second

    def test_offset_outside_interval(self, strong_model, strong_data):
        obs = InstantObservable.identity(2, 2)
        with pytest.raises(ValueError, match="s must lie"):
            reduced.rias_expectation(strong_model, strong_data, obs, strong_model.tau)

    def test_reconstruction(self):
        assert reduced.reconstruct_expectation(0.3 + 0.1j, 0.5) == pytest.approx(0.6 + 0.2j)
        with pytest.raises(ValueError):
            reduced.reconstruct_expectation(1.0, 0.0)


class TestPowers:
    def test_rank_one_projection(self):
        pi = np.array([[1.0, 0.0], [0.0, 0.0]])
        data = reduced.spectral_analysis(pi, np.array([1.0, 0.0]))
        frame = reduced.power_convergence(data, 5)
        assert np.allclose(frame['norm'], 0)

    def test_diagonal_half(self):
        data = reduced.spectral_analysis(np.diag([1.0, 0.5]), np.array([1.0, 0.0]))
        frame = reduced.power_convergence(data, 10)
        assert np.allclose(frame['norm'], 0.5 ** frame['m'])
        assert (frame['envelope'] >= frame['norm']).all()

    def test_rate_matches_gap(self, medium_model):
        data = reduced.analyze_model(medium_model)
        frame = reduced.power_convergence(data, 200)
        assert reduced.fit_decay_rate(frame) == pytest.approx(data.gamma, rel=0.2)

    def test_bounded_powers(self, rng):
        for _ in range(3):
            model = random_model(rng, lam=float(rng.uniform(0.1, 1.0)))
            samples = np.linspace(0, 4 * model.tau, 5)
            assert reduced.power_bound_check(model, samples, 500) <= 100

    def test_uncoupled_powers_are_isometric(self, free_model):
        assert reduced.power_bound_check(free_model, [0.5, 1.0], 20) == pytest.approx(1.0)

    def test_scalar_system(self, rng):
        model = random_model(rng, d_s=1, d_e=2)
        assert reduced.power_bound_check(model, [model.tau], 50) <= 1 + 1e-10


class TestFactorization:
    def test_uncoupled(self, free_model):
        assert reduced.factorization_check(free_model, 1.0, 1.0) <= 1e-12

    def test_benchmark(self):
        assert reduced.factorization_check(benchmark_model(0.5), 1.0, 1.0) <= 1e-8

    def test_random_models(self, rng):
        for _ in range(20):
            model = random_model(rng, lam=float(rng.uniform(-1, 1)))
            t1, t2 = rng.uniform(0, 2, size=2)
            assert reduced.factorization_check(model, t1, t2) <= 1e-8


def test_power_convergence_needs_ergodic(free_model):
    data = reduced.analyze_model(free_model, strict=False)
    with pytest.raises(NotErgodic):
        reduced.power_convergence(data, 3)


def test_pi_projection_is_limit_of_powers(strong_data):
    power = np.linalg.matrix_power(strong_data.m_matrix, 400)
    assert opnorm(power - strong_data.pi_projection) <= 1e-8
