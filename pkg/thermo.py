"""
Energy flux j_+ into the system, asymptotic energy and entropy production and
the average second law dE_+ = T_E dS_+.

The flux observable is evaluated with the lambda-scaled interaction lam * V.
"""

import dataclasses
from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd
from scipy.integrate import simpson

from errors import MethodDisagreement, NotErgodic, QuadratureError
from numerics import matrix_pairs, opnorm
from reduced import analyze_model
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)


@dataclass
class ThermoReport:
    """Flux and production rates of one model."""
    j_plus_op: np.ndarray
    j_plus_value: float
    form_residual: float
    quadrature_change: float
    tau: float
    beta_e: float
    de_plus: float | None = None
    ds_plus: float | None = None
    second_law_residual: float | None = None
    no_invariant_state: bool | None = None

    def to_frame(self):
        row = {k: v for k, v in self.__dict__.items() if k != 'j_plus_op'}
        return pd.DataFrame([row])

    def to_dict(self):
        out = {k: v for k, v in self.__dict__.items() if k != 'j_plus_op'}
        out['j_plus_op'] = matrix_pairs(self.j_plus_op)
        return out


def _flux_integral(model, nodes):
    """-i int_0^tau P e^{isL} [L_free, lam V] e^{-isL} P ds by composite Simpson."""
    energies, basis = np.linalg.eigh(model.l_total)
    coupling = model.lam * model.v
    commutator = model.l_free @ coupling - coupling @ model.l_free
    rotated = basis.conj().T @ commutator @ basis
    s = np.linspace(0.0, model.tau, nodes)
    gaps = energies[:, None] - energies[None, :]
    integrand = rotated[None, :, :] * np.exp(1j * s[:, None, None] * gaps[None, :, :])
    integral = simpson(integrand, x=s, axis=0)
    return -1j * model.compress(basis @ integral @ basis.conj().T)


def j_plus_operator(model, tol=DEFAULT_TOLERANCES, strict=False):
    """
    Both forms of the flux operator on the doubled system space.

    Form A is P lam V P - P e^{i tau L} lam V e^{-i tau L} P, form B the commutator
    integral. Does not need the asymptotic state, so it also runs on
    non-ergodic models.

    Args:
        strict: raise instead of logging a warning when the Simpson rule has not
            settled or the two forms disagree

    Returns:
        (form_a, form_b, form_residual, quadrature_change)

    Raises:
        QuadratureError: strict, and refining the Simpson rule moved form B by more than tol.richardson
        MethodDisagreement: strict, and the forms differ by more than tol.form_residual
    """
    coupling = model.lam * model.v
    energies, basis = np.linalg.eigh(model.l_total)
    forward = (basis * np.exp(1j * model.tau * energies)) @ basis.conj().T
    evolved = forward @ coupling @ forward.conj().T
    form_a = model.compress(coupling) - model.compress(evolved)

    nodes = tol.simpson_nodes
    form_b = _flux_integral(model, nodes)
    refined = _flux_integral(model, 2 * nodes - 1)
    quadrature_change = opnorm(refined - form_b)
    if quadrature_change > tol.richardson:
        message = f"Simpson rule changed by {quadrature_change:.3e} when refining the flux integral"
        if strict:
            raise QuadratureError(message)
        logger.warning(message)
    form_residual = opnorm(form_a - form_b)
    if form_residual > tol.form_residual:
        message = f"Difference and integral forms of j_+ disagree by {form_residual:.3e}"
        if strict:
            raise MethodDisagreement(message)
        logger.warning(message)
    logger.debug(f"flux forms differ by {form_residual:.3e}, Richardson change {quadrature_change:.3e}")
    return form_a, form_b, form_residual, quadrature_change


def j_plus(model, data, tol=DEFAULT_TOLERANCES, strict=False):
    """
    omega_+(j_+) from the reduced spectral data.

    Returns:
        ThermoReport with the productions still unset

    Raises:
        NotErgodic: when ``data`` is not ergodic
        QuadratureError, MethodDisagreement: see j_plus_operator (strict only)
    """
    data.require_ergodic()
    form_a, _, form_residual, quadrature_change = j_plus_operator(model, tol, strict)
    value = complex(np.vdot(data.omega_star, form_a @ data.omega_s))
    if abs(value.imag) > tol.imaginary:
        logger.warning(f"Discarding imaginary part {value.imag:.3e} of omega_+(j_+)")
    if value.real < -tol.imaginary:
        logger.warning(f"omega_+(j_+) = {value.real:.3e} is negative")
    return ThermoReport(
        j_plus_op=form_a,
        j_plus_value=float(value.real),
        form_residual=form_residual,
        quadrature_change=quadrature_change,
        tau=model.tau,
        beta_e=model.sys_e.beta,
    )


def no_invariant_state_certificate(report, tol=DEFAULT_TOLERANCES):
    """True when the flux is strictly positive, ruling out a normal invariant state."""
    return report.j_plus_value > tol.flux_positive


def productions(report, tol=DEFAULT_TOLERANCES):
    """Fill in dE_+ = j/tau, dS_+ = beta_E j/tau and |dE_+ - T_E dS_+| (None at beta_E = 0)."""
    de_plus = report.j_plus_value / report.tau
    ds_plus = report.beta_e * report.j_plus_value / report.tau
    residual = abs(de_plus - ds_plus / report.beta_e) if report.beta_e > 0 else None
    report = dataclasses.replace(report, de_plus=de_plus, ds_plus=ds_plus, second_law_residual=residual)
    return dataclasses.replace(report, no_invariant_state=no_invariant_state_certificate(report, tol))


def thermo_report(model, data=None, tol=DEFAULT_TOLERANCES, strict=False):
    """
    Complete ThermoReport for a model.

    Non-ergodic models are accepted only when the flux operator vanishes, in
    which case every production is zero.

    Raises:
        NotErgodic: non-ergodic model with a non-zero flux operator
        QuadratureError, MethodDisagreement: strict, and the flux forms are not trustworthy
    """
    if data is None:
        data = analyze_model(model, tol, strict=False)
    if data.ergodic:
        report = productions(j_plus(model, data, tol, strict), tol)
    else:
        form_a, _, form_residual, quadrature_change = j_plus_operator(model, tol, strict)
        if opnorm(form_a) > tol.flux_positive:
            raise NotErgodic(data.reason or 'degenerate-one')
        report = productions(ThermoReport(
            j_plus_op=form_a,
            j_plus_value=0.0,
            form_residual=form_residual,
            quadrature_change=quadrature_change,
            tau=model.tau,
            beta_e=model.sys_e.beta,
        ), tol)

    if model.verbose:
        logger.info("Thermodynamics:")
        logger.info(f"omega_+(j_+): {report.j_plus_value:.6e}")
        logger.info(f"Energy production dE_+: {report.de_plus:.6e}")
        logger.info(f"Entropy production dS_+: {report.ds_plus:.6e}")
        logger.info(f"Flux forms residual: {report.form_residual:.3e}")
    return report
