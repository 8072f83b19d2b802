"""
Pytest configuration and shared fixtures for the repeated interaction tests.

This file is automatically loaded by pytest and provides:
- The benchmark spin-spin parameters and model factories
- Seeded random generators and random finite models
- Paths to the example configurations
"""

from pathlib import Path

import numpy as np
import pytest

from gns import RepeatedInteractionModel, spin_spin_model
from reduced import analyze_model

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'

# E_S=1, E_E=1.5, beta_E=1, tau=1, b=c=1, a=d=0
BENCHMARK = {'e_s': 1.0, 'e_e': 1.5, 'beta_e': 1.0, 'tau': 1.0}
BENCHMARK_ALPHA1 = 1.10796
BENCHMARK_ALPHA2 = 0.79489
BENCHMARK_GAMMA0 = 0.778
GROUND = np.diag([1.0, 0.0]).astype(complex)


def benchmark_model(lam, **overrides):
    params = {**BENCHMARK, **overrides}
    return spin_spin_model(params['e_s'], params['e_e'], params['beta_e'], params['tau'], lam,
                           beta_s=params.get('beta_s', 0.0))


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_model(rng, d_s=2, d_e=2, lam=0.4, tau=0.9, beta_e=0.8):
    """Random Hermitian h_S, h_E and a two-term interaction with Hermitian factors."""
    terms = [(random_hermitian(rng, d_s), random_hermitian(rng, d_e)) for _ in range(2)]
    return RepeatedInteractionModel(
        random_hermitian(rng, d_s), random_hermitian(rng, d_e), terms,
        lam=lam, tau=tau, beta_s=0.0, beta_e=beta_e,
    )


@pytest.fixture
def rng():
    """Seeded generator so every run draws the same samples."""
    return np.random.default_rng(20240611)


@pytest.fixture
def free_model():
    """Benchmark spin-spin model with the coupling switched off."""
    return benchmark_model(0.0)


@pytest.fixture
def weak_model():
    return benchmark_model(0.05)


@pytest.fixture
def medium_model():
    return benchmark_model(0.3)


@pytest.fixture
def strong_model():
    return benchmark_model(0.6)


@pytest.fixture
def strong_data(strong_model):
    return analyze_model(strong_model)


@pytest.fixture
def weak_data(weak_model):
    return analyze_model(weak_model)


@pytest.fixture
def config_dir():
    return CONFIG_DIR


# Configure pytest markers
def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks tests as integration tests"
    )
