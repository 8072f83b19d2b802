"""
Tests for the command-line front end: JSON output, CSV trajectories and exit
codes.
"""

import io
import json

import numpy as np
import pandas as pd
import pytest

import cli


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr().out


def as_complex(pair):
    return complex(pair[0], pair[1])


class TestSpectrum:
    def test_ergodic(self, capsys, config_dir):
        code, out = run(capsys, 'spectrum', config_dir / 'spin_spin_lambda_0.6.json')
        assert code == cli.EXIT_OK
        payload = json.loads(out)
        assert payload['ergodic'] is True
        assert payload['model_kind'] == 'spin-spin'
        assert payload['lambda'] == 0.6
        eigenvalues = [as_complex(p) for p in payload['eigenvalues']]
        assert min(abs(1 - z) for z in eigenvalues) <= 1e-10
        assert payload['gamma'] > 0

    def test_uncoupled_not_ergodic(self, capsys, config_dir):
        code, out = run(capsys, 'spectrum', config_dir / 'spin_spin_lambda_0.json')
        assert code == cli.EXIT_NOT_ERGODIC
        payload = json.loads(out)
        assert payload['ergodic'] is False
        assert payload['omega_star'] is None

    def test_deterministic_output(self, capsys, config_dir):
        _, first = run(capsys, 'spectrum', config_dir / 'custom_finite.json')
        _, second = run(capsys, 'spectrum', config_dir / 'custom_finite.json')
        assert first == second
        assert json.dumps(json.loads(first), sort_keys=True) + "\n" == first

    def test_form_factor_config_rejected(self, capsys, config_dir):
        code, _ = run(capsys, 'spectrum', config_dir / 'sf_quadratic.json')
        assert code == cli.EXIT_INPUT


class TestInputErrors:
    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"model_kind": "spin-spin", ')
        code, out = run(capsys, 'spectrum', path)
        assert code == cli.EXIT_INPUT
        assert out == ''

    def test_missing_file(self, capsys, tmp_path):
        code, _ = run(capsys, 'thermo', tmp_path / 'absent.json')
        assert code == cli.EXIT_INPUT

    def test_missing_key(self, capsys, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text(json.dumps({'model_kind': 'spin-spin', 'tau': 1.0}))
        code, _ = run(capsys, 'spectrum', path)
        assert code == cli.EXIT_INPUT

    def test_form_factor_block_not_object(self, capsys, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text(json.dumps({'model_kind': 'sf-quadratic', 'tau': 1.0, 'lambda': 0.05,
                                    'sf': {'form_factor': {'params': [1.0]}}}))
        code, out = run(capsys, 'oracle', path)
        assert code == cli.EXIT_INPUT
        assert out == ''

    def test_numerical_failure(self, capsys, tmp_path, config_dir):
        overrides = tmp_path / 'tol.json'
        overrides.write_text(json.dumps({'fixed_point': -1.0}))
        code, out = run(capsys, '--tol-overrides', overrides, 'spectrum', config_dir / 'spin_spin_lambda_0.6.json')
        assert code == cli.EXIT_INPUT
        assert out == ''

    def test_tolerance_overrides(self, capsys, tmp_path, config_dir):
        overrides = tmp_path / 'tol.json'
        overrides.write_text(json.dumps({'circle': 1e-7}))
        code, _ = run(capsys, '--tol-overrides', overrides, 'spectrum', config_dir / 'spin_spin_lambda_0.3.json')
        assert code == cli.EXIT_OK
        overrides.write_text(json.dumps({'no_such_tolerance': 1.0}))
        code, _ = run(capsys, '--tol-overrides', overrides, 'spectrum', config_dir / 'spin_spin_lambda_0.3.json')
        assert code == cli.EXIT_INPUT


class TestSimulate:
    def test_identity_observable_to_stdout(self, capsys, config_dir):
        code, out = run(capsys, 'simulate', config_dir / 'spin_spin_lambda_0.6.json', '--chain', 4)
        assert code == cli.EXIT_OK
        frame = pd.read_csv(io.StringIO(out))
        assert list(frame.columns) == ['t', 're_value', 'im_value', 'e_plus_re', 'e_plus_im', 'abs_err']
        assert len(frame) == 16
        assert np.allclose(frame['re_value'], 1.0)
        assert np.allclose(frame['abs_err'], 0.0, atol=1e-9)

    def test_observable_to_file(self, capsys, tmp_path, config_dir):
        out_path = tmp_path / 'trajectory.csv'
        code, _ = run(capsys, 'simulate', config_dir / 'spin_spin_lambda_0.6.json', '--chain', 4, '--steps', 3,
                      '--observable', config_dir / 'observable_ground.json', '--out', out_path)
        assert code == cli.EXIT_OK
        frame = pd.read_csv(out_path)
        assert len(frame) == 12
        assert frame['t'].is_monotonic_increasing
        assert ((frame['re_value'] >= -1e-9) & (frame['re_value'] <= 1 + 1e-9)).all()

    @pytest.mark.slow
    def test_error_decays(self, capsys, config_dir):
        code, out = run(capsys, 'simulate', config_dir / 'spin_spin_lambda_0.6.json', '--chain', 8,
                        '--observable', config_dir / 'observable_ground.json')
        assert code == cli.EXIT_OK
        frame = pd.read_csv(io.StringIO(out))
        assert frame['abs_err'].iloc[-1] < frame['abs_err'].iloc[0]

    def test_capacity(self, capsys, config_dir):
        code, _ = run(capsys, 'simulate', config_dir / 'spin_spin_lambda_0.6.json', '--chain', 3, '--steps', 5)
        assert code == cli.EXIT_INPUT

    def test_chain_required(self, capsys, config_dir):
        code, _ = run(capsys, 'simulate', config_dir / 'spin_spin_lambda_0.6.json')
        assert code == cli.EXIT_INPUT

    def test_not_ergodic(self, capsys, config_dir):
        code, _ = run(capsys, 'simulate', config_dir / 'spin_spin_lambda_0.json', '--chain', 3)
        assert code == cli.EXIT_NOT_ERGODIC


class TestThermo:
    def test_uncoupled_produces_nothing(self, capsys, config_dir):
        code, out = run(capsys, 'thermo', config_dir / 'spin_spin_lambda_0.json')
        assert code == cli.EXIT_OK
        payload = json.loads(out)
        assert payload['j_plus_value'] == 0.0
        assert payload['de_plus'] == 0.0 and payload['ds_plus'] == 0.0

    def test_benchmark(self, capsys, config_dir):
        code, out = run(capsys, 'thermo', config_dir / 'spin_spin_lambda_0.6.json')
        assert code == cli.EXIT_OK
        payload = json.loads(out)
        assert payload['j_plus_value'] > 0
        assert payload['no_invariant_state'] is True
        assert len(payload['j_plus_op']) == 4

    def test_strict_refuses_disagreeing_forms(self, capsys, tmp_path, config_dir):
        overrides = tmp_path / 'tol.json'
        overrides.write_text(json.dumps({'form_residual': -1.0, 'richardson': 1e-6}))
        code, out = run(capsys, '--tol-overrides', overrides, 'thermo', config_dir / 'spin_spin_lambda_0.6.json',
                        '--strict')
        assert code == cli.EXIT_PRECONDITION
        assert out == ''
        code, _ = run(capsys, '--tol-overrides', overrides, 'thermo', config_dir / 'spin_spin_lambda_0.6.json')
        assert code == cli.EXIT_OK


class TestOracle:
    def test_spin_spin(self, capsys, config_dir):
        code, out = run(capsys, 'oracle', config_dir / 'spin_spin_lambda_0.05.json')
        assert code == cli.EXIT_OK
        payload = json.loads(out)
        assert payload['alpha1'] == pytest.approx(1.10796, abs=1e-4)
        assert payload['gamma0'] == pytest.approx(0.778, abs=1e-3)

    def test_quadratic(self, capsys, config_dir):
        code, out = run(capsys, 'oracle', config_dir / 'sf_quadratic.json')
        assert code == cli.EXIT_OK
        payload = json.loads(out)
        assert payload['alpha1'] > 0 and payload['alpha2'] > 0
        assert payload['model'] == 'sf-quadratic'
        assert 'mc_alpha1' not in payload['extras']

    def test_linear(self, capsys, config_dir):
        code, out = run(capsys, 'oracle', config_dir / 'sf_linear.json')
        assert code == cli.EXIT_OK
        assert json.loads(out)['ds_plus_leading'] > 0

    def test_custom_refused(self, capsys, config_dir):
        code, out = run(capsys, 'oracle', config_dir / 'custom_finite.json')
        assert code == cli.EXIT_PRECONDITION
        assert out == ''

    def test_resonant_tau_refused(self, capsys, config_dir):
        code, _ = run(capsys, 'oracle', config_dir / 'sf_resonant.json')
        assert code == cli.EXIT_PRECONDITION


class TestVerify:
    def test_weak_spin_spin_passes(self, capsys, config_dir):
        code, out = run(capsys, 'verify', config_dir / 'spin_spin_lambda_0.05.json')
        payload = json.loads(out)
        assert code == cli.EXIT_OK
        assert payload['passed'] is True
        checks = {record['check'] for record in payload['checks']}
        assert {'fixed_point', 'cptp_duality', 'oracle_eigenvalues'} <= checks

    def test_resonant_refused(self, capsys, config_dir):
        code, _ = run(capsys, 'verify', config_dir / 'sf_resonant.json')
        assert code == cli.EXIT_PRECONDITION


def test_emit_handles_numpy_values():
    stream = io.StringIO()
    cli.emit({'b': np.float64(1.5), 'a': np.arange(2), 'c': float('inf'), 'd': [np.nan, np.bool_(True)]}, stream)
    assert stream.getvalue() == '{"a": [0, 1], "b": 1.5, "c": null, "d": [null, true]}\n'


def test_emit_is_standard_json():
    stream = io.StringIO()
    cli.emit({'gamma': np.float64(np.inf), 'nested': {'x': (1.0, -np.inf)}}, stream)
    assert 'Infinity' not in stream.getvalue()
    assert json.loads(stream.getvalue(), parse_constant=pytest.fail) == {'gamma': None, 'nested': {'x': [1.0, None]}}


def test_scalar_system_gap_emitted_as_null(capsys, tmp_path):
    path = tmp_path / 'scalar.json'
    path.write_text(json.dumps({'model_kind': 'custom-finite', 'tau': 1.0, 'lambda': 0.3,
                                'custom': {'h_S': [[0.0]], 'h_E': [[0.0, 0.0], [0.0, 1.0]],
                                           'v_terms': [[[[1.0]], [[0.0, 1.0], [1.0, 0.0]]]]}}))
    code, out = run(capsys, 'spectrum', path)
    assert code == cli.EXIT_OK
    assert json.loads(out)['gamma'] is None
