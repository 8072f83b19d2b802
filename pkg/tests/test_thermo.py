"""
Tests for the energy flux, the asymptotic productions and the average second
law.
"""

import numpy as np
import pytest

import gns
import reduced
import thermo
from errors import MethodDisagreement, NotErgodic, QuadratureError
from sforacle import spinspin_oracle
from tests.conftest import BENCHMARK, benchmark_model, random_model
from tolerances import Tolerances


def commuting_model(lam=0.4):
    """Interaction diagonal in the energy bases, so it commutes with L_S + L_E."""
    z = np.diag([1.0, -1.0])
    return gns.RepeatedInteractionModel(np.diag([0.0, 1.0]), np.diag([0.0, 1.5]), [(z, z)],
                                        lam=lam, tau=1.0, beta_s=0.0, beta_e=1.0)


class TestFluxOperator:
    def test_forms_agree(self, strong_model):
        form_a, form_b, residual, change = thermo.j_plus_operator(strong_model)
        assert residual <= 1e-7
        assert np.allclose(form_a, form_b, atol=1e-7)
        assert change <= 1e-7

    def test_forms_agree_on_random_model(self, rng):
        model = random_model(rng, d_s=2, d_e=2, lam=0.3)
        _, _, residual, _ = thermo.j_plus_operator(model)
        assert residual <= 1e-7

    def test_zero_coupling(self, free_model):
        form_a, form_b, _, _ = thermo.j_plus_operator(free_model)
        assert np.allclose(form_a, 0) and np.allclose(form_b, 0)

    def test_commuting_interaction(self):
        form_a, form_b, _, _ = thermo.j_plus_operator(commuting_model())
        assert np.allclose(form_a, 0, atol=1e-12)
        assert np.allclose(form_b, 0, atol=1e-12)


class TestStrictMode:
    def test_unsettled_quadrature_raises(self, strong_model):
        tol = Tolerances(richardson=-1.0)
        with pytest.raises(QuadratureError, match="Simpson"):
            thermo.j_plus_operator(strong_model, tol, strict=True)
        assert thermo.j_plus_operator(strong_model, tol)[3] >= 0

    def test_form_disagreement_raises(self, strong_model, strong_data):
        tol = Tolerances(richardson=1e-6, form_residual=-1.0)
        with pytest.raises(MethodDisagreement, match="disagree"):
            thermo.thermo_report(strong_model, strong_data, tol, strict=True)
        assert thermo.thermo_report(strong_model, strong_data, tol).j_plus_value > 0

    def test_non_ergodic_model_checked(self, free_model):
        with pytest.raises(MethodDisagreement):
            thermo.thermo_report(free_model, tol=Tolerances(form_residual=-1.0), strict=True)

    def test_settled_forms_pass(self, strong_model, strong_data):
        tol = Tolerances(richardson=1e-6, form_residual=1e-6)
        report = thermo.thermo_report(strong_model, strong_data, tol, strict=True)
        assert report.form_residual <= 1e-6


class TestReport:
    def test_benchmark_flux_positive(self, strong_model, strong_data):
        report = thermo.thermo_report(strong_model, strong_data)
        assert report.j_plus_value > 1e-6
        assert report.no_invariant_state
        assert report.de_plus == pytest.approx(report.j_plus_value / strong_model.tau)
        assert report.ds_plus == pytest.approx(BENCHMARK['beta_e'] * report.de_plus)

    def test_second_law_identity(self, rng):
        for _ in range(3):
            model = random_model(rng, lam=0.3, beta_e=float(rng.uniform(0.2, 2.0)))
            data = reduced.analyze_model(model, strict=False)
            if data.ergodic:
                assert thermo.thermo_report(model, data).second_law_residual <= 1e-12

    def test_flux_non_negative(self, rng):
        for _ in range(5):
            model = random_model(rng, lam=float(rng.uniform(0.1, 0.8)))
            data = reduced.analyze_model(model, strict=False)
            if data.ergodic:
                assert thermo.thermo_report(model, data).j_plus_value >= -1e-9

    def test_zero_coupling_has_no_production(self, free_model):
        report = thermo.thermo_report(free_model)
        assert report.j_plus_value == 0.0
        assert report.de_plus == 0.0 and report.ds_plus == 0.0
        assert not report.no_invariant_state

    def test_commuting_interaction_has_no_production(self):
        report = thermo.thermo_report(commuting_model())
        assert abs(report.j_plus_value) <= 1e-8
        assert not report.no_invariant_state

    def test_infinite_temperature_has_no_residual(self):
        report = thermo.thermo_report(benchmark_model(0.3, beta_e=0.0))
        assert report.second_law_residual is None
        assert report.ds_plus == 0.0

    def test_weak_coupling_certificate(self, weak_model, weak_data):
        assert thermo.thermo_report(weak_model, weak_data).no_invariant_state

    def test_weak_coupling_entropy_production_matches_expansion(self, weak_model, weak_data):
        report = thermo.thermo_report(weak_model, weak_data)
        oracle = spinspin_oracle(BENCHMARK['e_s'], BENCHMARK['e_e'], BENCHMARK['beta_e'], BENCHMARK['tau'],
                                 0.05, [[0, 1], [1, 0]])
        assert report.ds_plus == pytest.approx(oracle.ds_plus_leading, rel=0.1)

    def test_j_plus_needs_ergodic_data(self, free_model):
        data = reduced.analyze_model(free_model, strict=False)
        with pytest.raises(NotErgodic):
            thermo.j_plus(free_model, data)

    def test_serialization(self, strong_model, strong_data):
        report = thermo.thermo_report(strong_model, strong_data)
        out = report.to_dict()
        assert len(out['j_plus_op']) == 4 and len(out['j_plus_op'][0][0]) == 2
        frame = report.to_frame()
        assert 'j_plus_op' not in frame.columns
        assert frame['j_plus_value'].iloc[0] == report.j_plus_value


def test_productions_of_zero_flux():
    report = thermo.ThermoReport(j_plus_op=np.zeros((4, 4)), j_plus_value=0.0, form_residual=0.0,
                                 quadrature_change=0.0, tau=2.0, beta_e=1.0)
    done = thermo.productions(report)
    assert done.de_plus == 0.0 and done.ds_plus == 0.0
    assert done.second_law_residual == 0.0
    assert done.no_invariant_state is False
