"""
Property checks of a configured model, in the manner of a calculation
self-check: every check logs a ✓ / ⚠ / ✗ line and the whole run is returned as
a table of check, value, threshold, passed.
"""

from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd

import chainsim
import reduced
import sforacle
import thermo
from errors import CapacityError, PreconditionError
from numerics import opnorm
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)

POWER_BOUND = 100.0
ORACLE_CONSTANT = 50.0
MC_POINTS = 2**20
MC_AGREEMENT = 1e-3


@dataclass
class CheckResult:
    check: str
    value: float
    threshold: float
    passed: bool


def _record(results, check, value, threshold, passed=None):
    passed = bool(value <= threshold) if passed is None else bool(passed)
    if passed:
        logger.info(f"✓ {check}: {value:.3e} (threshold {threshold:.1e})")
    else:
        logger.info(f"✗ {check}: {value:.3e} exceeds threshold {threshold:.1e}")
    results.append(CheckResult(check=check, value=float(value), threshold=float(threshold), passed=passed))


def match_eigenvalues(numeric, predicted):
    """
    Largest distance between each predicted eigenvalue and its nearest unused
    numerical one, after setting aside the numerical eigenvalue closest to 1.
    """
    pool = list(np.asarray(numeric, dtype=complex))
    pool.pop(int(np.argmin(np.abs(np.array(pool) - 1))))
    worst = 0.0
    for z in predicted:
        idx = int(np.argmin(np.abs(np.array(pool) - z)))
        worst = max(worst, abs(pool.pop(idx) - z))
    return worst


def finite_checks(config, tol=DEFAULT_TOLERANCES):
    model = config.build_model(tol)
    results = []
    m_matrix = reduced.reduced_map(model, tol=tol)
    _record(results, 'fixed_point', np.linalg.norm(m_matrix @ model.omega_s - model.omega_s), tol.fixed_point)
    data = reduced.spectral_analysis(m_matrix, model.omega_s, tol=tol, strict=False)
    _record(results, 'spectrum_in_unit_disk', float(np.max(np.abs(data.eigenvalues))) - 1, tol.circle)
    _record(results, 'power_bound', reduced.power_bound_check(model, [model.tau / 2, model.tau], 200, tol),
            POWER_BOUND)
    try:
        _record(results, 'factorization', reduced.factorization_check(model, 0.3 * model.tau, 0.7 * model.tau, tol),
                tol.factorization)
    except CapacityError as exc:
        logger.info(f"⚠ factorization skipped: {exc}")

    report = thermo.thermo_report(model, data, tol)
    _record(results, 'flux_forms', report.form_residual, tol.form_residual)
    _record(results, 'flux_nonnegative', -report.j_plus_value, tol.imaginary)
    if report.second_law_residual is not None:
        _record(results, 'second_law', report.second_law_residual, 1e-12)

    if not data.ergodic:
        logger.info(f"⚠ reduced dynamics not ergodic ({data.reason}); asymptotic checks skipped")
        return results

    density = reduced.asymptotic_density(data)
    fixed = chainsim.cptp_fixed_point(model, tol=tol)
    _record(results, 'cptp_duality', opnorm(fixed - density), 1e-8)

    if config.model_kind == 'spin-spin' and abs(config.lam) <= tol.lambda_validity:
        try:
            oracle = sforacle.spinspin_oracle(config.e_s, config.e_e, config.beta_e, config.tau,
                                              config.lam, config.coupling, tol)
        except PreconditionError as exc:
            logger.info(f"⚠ spin-spin oracle does not apply: {exc}")
        else:
            deviation = match_eigenvalues(data.eigenvalues, [oracle.e0, oracle.e_plus, oracle.e_minus])
            _record(results, 'oracle_eigenvalues', deviation, ORACLE_CONSTANT * abs(config.lam)**3)
            ground = float(reduced.asymptotic_expectation(data, np.diag([1.0, 0.0])).real)
            _record(results, 'oracle_asymptotic_state', abs(ground - oracle.omega_plus_diag[0]),
                    ORACLE_CONSTANT * config.lam**2)
    return results


def form_factor_checks(config, tol=DEFAULT_TOLERANCES, seed=None):
    ff = config.form_factor(tol)
    results = []
    if config.model_kind == 'sf-quadratic':
        result = sforacle.sf_quadratic_all(ff, config.tau, config.lam, tol)
    else:
        result = sforacle.sf_linear_all(ff, config.tau, config.lam, tol)
    _record(results, 'alphas_positive', -min(result.alpha1, result.alpha2), 0.0,
            passed=min(result.alpha1, result.alpha2) > 0)
    _record(results, 'eigenvalue_conjugacy', abs(result.e_minus - np.conj(result.e_plus)), 1e-15)
    _record(results, 'entropy_integrand_positive', -sforacle.entropy_integrand_minimum(ff.beta, seed=seed or 0), 0.0)
    _record(results, 'entropy_production_positive', -result.ds_plus_leading, 0.0,
            passed=result.ds_plus_leading > 0 or config.lam == 0 or ff.beta == 0)
    if config.model_kind == 'sf-quadratic':
        if not ff.is_zero:
            _record(results, 'entropy_methods', sforacle.entropy_method_disagreement(ff, config.tau),
                    tol.method_agreement)
        if seed is not None:
            mc = sforacle.mc_quadratic_alphas(ff, config.tau, points=MC_POINTS, seed=seed)
            deviation = max(abs(mc[0] - result.alpha1) / result.alpha1, abs(mc[1] - result.alpha2) / result.alpha2)
            _record(results, 'monte_carlo_alphas', deviation, MC_AGREEMENT)
    return results


def run_checks(config, tol=DEFAULT_TOLERANCES, seed=None):
    """
    Run the property checks that apply to ``config``.

    Returns:
        DataFrame with columns check, value, threshold, passed
    """
    if config.is_finite:
        results = finite_checks(config, tol)
    else:
        results = form_factor_checks(config, tol, seed)
    frame = pd.DataFrame([r.__dict__ for r in results], columns=['check', 'value', 'threshold', 'passed'])
    failed = int((~frame['passed']).sum())
    logger.info(f"{len(frame) - failed} of {len(frame)} checks passed")
    return frame
