"""
Closed-form weak-coupling expressions for three concrete repeated interaction
models, used as independent oracles for the numerics.

Spin-spin: two-level system and two-level chain elements (exactly comparable
with the finite-dimensional model). Spin-fermion: a spin coupled quadratically
or linearly to a free fermion field with form factor g; only quadratures of the
printed expansions are available there.

Radial integrals run over [0, R] with composite Gauss-Legendre panels: width
0.5 up to r = 16, then geometric panels up to R. R starts at max(40, 40 / beta)
and doubles until the bounded tail of the integrands falls below 1e-10.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
import pandas as pd
from scipy.special import erfc
from scipy.stats import qmc

from errors import MethodDisagreement, PreconditionError, QuadratureError, ResonanceError, SF1Violation
from numerics import as_square, complex_pair
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)

FAMILIES = ('exponential', 'gaussian')
NODES_PER_PANEL = 8
COARSE_NODES_PER_PANEL = 4
MAX_CUTOFF = 40.0 * 2**12


def sinc(x):
    """sin(x) / x (unnormalized)."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def one_minus_sinc_over(y, cutoff=DEFAULT_TOLERANCES.series_cutoff):
    """(1 - sinc y) / y with a Taylor branch near the removable singularity."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < cutoff
    y2 = y * y
    series = y * (1 / 6 - y2 / 120 + y2**2 / 5040 - y2**3 / 362880 + y2**4 / 39916800)
    safe = np.where(small, 1.0, y)
    exact = (1 - sinc(safe)) / safe
    return np.where(small, series, exact)


@dataclass(frozen=True)
class FormFactor:
    """
    Radial form factor g with |g(r)|^2 given by a named family.

    exponential: g(r) = c e^{-k r}      (params c, k)
    gaussian:    g(r) = c e^{-r^2 / (2 w^2)}   (params c, w)
    """
    family: str
    params: dict
    beta: float
    tail_tol: float = DEFAULT_TOLERANCES.sf1_tail

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown form factor family: {self.family}")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be a finite number >= 0")
        scale = self.params['k'] if self.family == 'exponential' else self.params['w']
        if scale <= 0:
            raise ValueError("form factor width parameter must be positive")

    def norm_sq(self, r):
        """|g(r)|^2"""
        r = np.asarray(r, dtype=float)
        c = self.params['c']
        if self.family == 'exponential':
            return c**2 * np.exp(-2 * self.params['k'] * r)
        return c**2 * np.exp(-(r / self.params['w'])**2)

    def thermal_norm_sq(self, r):
        """|g_beta(r)|^2 = |g(r)|^2 / (1 + e^{-beta r})"""
        r = np.asarray(r, dtype=float)
        return self.norm_sq(r) / (1 + np.exp(-self.beta * r))

    def tail_fraction(self, radius):
        """
        Share of the integral of (1 + r) |g(r)|^2 over [0, inf) that lies beyond ``radius``.

        Every radial integrand is bounded by (1 + r) |g(r)|^2 times bounded factors,
        so this bounds the relative truncation error at R = radius.
        """
        if self.family == 'exponential':
            rate = self.decay_rate
            return math.exp(-rate * radius) * (rate * (1 + radius) + 1) / (rate + 1)
        w = self.params['w']
        gauss = 0.5 * math.sqrt(math.pi) * w
        tail = gauss * erfc(radius / w) + 0.5 * w**2 * math.exp(-(radius / w)**2)
        return tail / (gauss + 0.5 * w**2)

    @property
    def cutoff(self):
        """
        Truncation radius R.

        Starts at max(40, 40 / beta) and doubles until the tail fraction drops
        below the tail tolerance.

        Raises:
            QuadratureError: the form factor decays too slowly for any R up to MAX_CUTOFF
        """
        radius = 40.0 if self.beta == 0 else max(40.0, 40.0 / self.beta)
        while self.tail_fraction(radius) > self.tail_tol:
            radius *= 2
            if radius > MAX_CUTOFF:
                raise QuadratureError(f"form factor tail exceeds {self.tail_tol:.1e} at every R <= {MAX_CUTOFF:g}")
        return radius

    @property
    def decay_rate(self):
        """Rate of the exponential proposal used by the Monte-Carlo cross-check."""
        if self.family == 'exponential':
            return 2 * self.params['k']
        return math.sqrt(2) / self.params['w']

    @property
    def is_zero(self):
        return self.params['c'] == 0


def make_form_factor(family='exponential', beta=1.0, tol=DEFAULT_TOLERANCES, **params):
    """Form factor with family defaults (exponential: c=1, k=1/2; gaussian: c=1, w=1)."""
    defaults = {'exponential': {'c': 1.0, 'k': 0.5}, 'gaussian': {'c': 1.0, 'w': 1.0}}
    if family not in defaults:
        raise ValueError(f"unknown form factor family: {family}")
    unknown = set(params) - set(defaults[family])
    if unknown:
        raise ValueError(f"unknown {family} parameters: {', '.join(sorted(unknown))}")
    merged = {**defaults[family], **{k: float(v) for k, v in params.items()}}
    return FormFactor(family=family, params=merged, beta=float(beta), tail_tol=tol.sf1_tail)


@dataclass
class PerturbativeResult:
    model: str
    tau: float
    lam: float
    beta: float
    alpha1: float
    alpha2: float
    gamma_leading: float
    e0: complex
    e_plus: complex
    e_minus: complex
    omega_plus_diag: tuple
    ds_plus_leading: float
    gamma0: float | None = None
    off_diagonal: float | None = None
    extras: dict = field(default_factory=dict)

    def to_frame(self):
        row = {}
        for key, value in self.__dict__.items():
            if key == 'extras':
                row.update(value)
            elif key == 'omega_plus_diag':
                row['omega_plus_ground'], row['omega_plus_excited'] = value
            elif isinstance(value, complex):
                row[f'{key}_re'], row[f'{key}_im'] = value.real, value.imag
            else:
                row[key] = value
        return pd.DataFrame([row])

    def to_dict(self):
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, complex):
                out[key] = complex_pair(value)
            elif key == 'omega_plus_diag':
                out[key] = [float(v) for v in value]
            else:
                out[key] = value
        return out


def check_lambda(lam, tol=DEFAULT_TOLERANCES):
    if abs(lam) > tol.lambda_validity:
        logger.warning(f"lambda={lam} is outside the weak-coupling range |lambda| <= {tol.lambda_validity}")


def check_tau(tau, tol=DEFAULT_TOLERANCES):
    """Refuse tau in pi/2 + pi N, where the unperturbed eigenvalues collide."""
    if not np.isfinite(tau) or tau <= 0:
        raise ValueError("tau must be positive")
    n = round((tau - math.pi / 2) / math.pi)
    if n >= 0 and abs(tau - (math.pi / 2 + n * math.pi)) <= tol.resonance:
        raise ResonanceError(f"tau={tau} lies on the resonance pi/2 + {n} pi")


def panel_grid(cutoff, nodes_per_panel=NODES_PER_PANEL, coarse=False):
    """
    Composite Gauss-Legendre nodes and weights on [0, cutoff].

    The coarse grid (12 panels) feeds the four-dimensional tensor quadrature.
    """
    if coarse:
        edges = np.concatenate([np.arange(0.0, 16.0, 2.0), np.geomspace(16.0, cutoff, 5)])
    else:
        edges = np.concatenate([np.arange(0.0, 16.0, 0.5), np.geomspace(16.0, cutoff, 17)])
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return nodes, weights


def _converged(compute, name, tol):
    """Run ``compute(nodes_per_panel)`` at 8 and 16 nodes and return the finer result."""
    coarse = np.atleast_1d(compute(NODES_PER_PANEL))
    fine = np.atleast_1d(compute(2 * NODES_PER_PANEL))
    change = float(np.max(np.abs(fine - coarse) / np.maximum(1.0, np.abs(fine))))
    logger.debug(f"{name}: doubling the nodes changed the result by {change:.2e}")
    if change > tol.quadrature_doubling:
        raise QuadratureError(f"{name} did not converge (change {change:.3g} on doubling)")
    return fine


def check_sf1(ff, tol=DEFAULT_TOLERANCES):
    """
    Truncation test of the e^{beta h / 2} g integrability condition.

    The weight (1 + e^{beta r}) |g|^2 / (1 + e^{-beta r}) over [R, 2R] must be a
    negligible fraction of its integral over [0, R].
    """
    def weight(r):
        return (1 + np.exp(ff.beta * r)) * ff.thermal_norm_sq(r)

    r, w = panel_grid(ff.cutoff)
    inner = float(np.sum(w * weight(r)))
    x, wx = np.polynomial.legendre.leggauss(4 * NODES_PER_PANEL)
    edges = np.linspace(ff.cutoff, 2 * ff.cutoff, 41)
    lo, hi = edges[:-1, None], edges[1:, None]
    tail_r = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    tail = float(np.sum((0.5 * (hi - lo) * wx).ravel() * weight(tail_r)))
    if not np.isfinite(tail) or tail > tol.sf1_tail * inner:
        raise SF1Violation(f"form factor tail {tail:.3g} is not negligible against {inner:.3g}")
    return tail, inner


def _sinc2_pair(tau, r):
    """sinc^2(tau (2 - r1 + r2) / 2) on the grid."""
    return sinc(tau * (2 - r[:, None] + r[None, :]) / 2) ** 2


def _quadratic_alpha_terms(ff, tau, nodes_per_panel):
    r, w = panel_grid(ff.cutoff, nodes_per_panel)
    wf = w * ff.thermal_norm_sq(r)
    kernel = wf[:, None] * wf[None, :] * _sinc2_pair(tau, r)
    boltz = np.exp(-ff.beta * r)
    return np.array([boltz @ kernel.sum(axis=1), kernel.sum(axis=0) @ boltz])


def sf_quadratic_alphas(ff, tau, tol=DEFAULT_TOLERANCES):
    """
    Rates alpha_1, alpha_2 of the quadratic spin-fermion model:
    alpha_j = int int e^{-beta r_j} |g_beta(r1)|^2 |g_beta(r2)|^2 sinc^2(tau (2 - r1 + r2) / 2).

    Raises:
        SF1Violation: form factor not integrable against e^{beta r}
        QuadratureError: doubling the nodes changes the result by more than 1e-7
    """
    check_tau(tau, tol)
    check_sf1(ff, tol)
    if ff.is_zero:
        logger.warning("zero form factor: both rates vanish")
        return 0.0, 0.0
    alpha1, alpha2 = _converged(lambda n: _quadratic_alpha_terms(ff, tau, n), 'quadratic alphas', tol)
    return float(alpha1), float(alpha2)


def _quadratic_shift_terms(ff, tau, nodes_per_panel):
    r, w = panel_grid(ff.cutoff, nodes_per_panel)
    wf = w * ff.thermal_norm_sq(r)
    boltz = np.exp(-ff.beta * r)
    thermal = float(np.sum(wf * boltz))
    x = r[:, None] - r[None, :] - 2
    kernel = wf[:, None] * wf[None, :] * (boltz[:, None] + boltz[None, :])
    shift = float(np.sum(kernel * tau * one_minus_sinc_over(tau * x)))
    return np.array([thermal, shift])


def _thermal_overlap(ff, tol):
    """|e^{-beta h / 2} g_beta|^2 = int e^{-beta r} |g_beta(r)|^2."""
    def compute(n):
        r, w = panel_grid(ff.cutoff, n)
        return float(np.sum(w * ff.thermal_norm_sq(r) * np.exp(-ff.beta * r)))
    return float(_converged(compute, 'thermal overlap', tol)[0])


def sf_quadratic_eigs(ff, tau, lam, tol=DEFAULT_TOLERANCES):
    """
    Second-order expansions (e_0, e_+, e_-) of the non-unit eigenvalues of the
    reduced map of the quadratic spin-fermion model.
    """
    check_lambda(lam, tol)
    alpha1, alpha2 = sf_quadratic_alphas(ff, tau, tol)
    thermal, shift = _converged(lambda n: _quadratic_shift_terms(ff, tau, n), 'quadratic level shift', tol)
    lam2 = lam**2
    damping = 1 - lam2 * tau**2 * (alpha1 + alpha2) / 2
    imaginary = lam2 * tau * (thermal**2 - shift)
    e0 = complex(1 - lam2 * tau**2 * (alpha1 + alpha2))
    e_plus = complex(np.exp(2j * tau) * (damping + 1j * imaginary))
    e_minus = complex(np.exp(-2j * tau) * (damping - 1j * imaginary))
    return e0, e_plus, e_minus


def _pair_moments(ff, tau, r, w):
    """alpha_1, alpha_2 and the (r1 - r2)-weighted moments F_1, F_2 on a grid."""
    wf = w * ff.thermal_norm_sq(r)
    kernel = wf[:, None] * wf[None, :] * _sinc2_pair(tau, r)
    boltz = np.exp(-ff.beta * r)
    moment = kernel * (r[:, None] - r[None, :])
    return (boltz @ kernel.sum(axis=1), kernel.sum(axis=0) @ boltz,
            boltz @ moment.sum(axis=1), moment.sum(axis=0) @ boltz)


def _separable_entropy_integral(ff, tau, r, w):
    """Four-variable entropy integral as 2 (alpha_1 F_2 - alpha_2 F_1)."""
    alpha1, alpha2, f1, f2 = _pair_moments(ff, tau, r, w)
    return 2 * (alpha1 * f2 - alpha2 * f1), alpha1 + alpha2


def _tensor_entropy_integral(ff, tau, r, w):
    """Four-variable entropy integral by brute-force tensor quadrature."""
    wf = w * ff.thermal_norm_sq(r)
    pair = wf[:, None] * wf[None, :] * _sinc2_pair(tau, r)
    boltz = np.exp(-ff.beta * r)
    total = 0.0
    for i in range(r.size):
        # axes (j, k, l) for r2, r3, r4 with r1 = r[i]
        linear = (r[:, None, None] + r[None, :, None] - r[i] - r[None, None, :])
        weights = boltz[i] * boltz[None, None, :] - boltz[:, None, None] * boltz[None, :, None]
        total += float(np.sum(pair[i][:, None, None] * pair[None, :, :] * linear * weights))
    return total


def entropy_method_disagreement(ff, tau):
    """Relative gap between the separable and tensor-grid entropy integrals on the coarse grid."""
    r, w = panel_grid(ff.cutoff, COARSE_NODES_PER_PANEL, coarse=True)
    separable, _ = _separable_entropy_integral(ff, tau, r, w)
    tensor = _tensor_entropy_integral(ff, tau, r, w)
    logger.debug(f"entropy integral: separable {separable:.10g}, tensor grid {tensor:.10g}")
    return abs(separable - tensor) / max(abs(separable), abs(tensor), np.finfo(float).tiny)


def sf_quadratic_entropy(ff, tau, lam, tol=DEFAULT_TOLERANCES):
    """
    Leading-order entropy production dS_+ of the quadratic spin-fermion model.

    The four-variable integral is evaluated by separable decomposition on the
    production grid and cross-checked against a tensor-grid quadrature on a
    coarse grid.

    Raises:
        MethodDisagreement: the two evaluations differ by more than 1e-5 relative
        PreconditionError: alpha_1 + alpha_2 = 0
    """
    check_lambda(lam, tol)
    check_tau(tau, tol)
    check_sf1(ff, tol)
    if lam == 0:
        return 0.0
    if ff.is_zero:
        raise PreconditionError("alpha_1 + alpha_2 = 0 for a zero form factor")

    disagreement = entropy_method_disagreement(ff, tau)
    if disagreement > tol.method_agreement:
        raise MethodDisagreement(f"entropy integral methods disagree by {disagreement:.3g} (relative)")

    def compute(n):
        value, alpha_sum = _separable_entropy_integral(ff, tau, *panel_grid(ff.cutoff, n))
        return np.array([value, alpha_sum])

    integral, alpha_sum = _converged(compute, 'entropy integral', tol)
    if alpha_sum <= 0:
        raise PreconditionError("alpha_1 + alpha_2 = 0")
    ds = lam**2 * ff.beta * tau * integral / (2 * alpha_sum)
    if ds < -tol.imaginary:
        logger.warning(f"negative leading entropy production {ds:.3e}")
    return float(ds)


def sf_quadratic_all(ff, tau, lam, tol=DEFAULT_TOLERANCES):
    """Every quadratic-model expansion bundled into one PerturbativeResult."""
    alpha1, alpha2 = sf_quadratic_alphas(ff, tau, tol)
    if alpha1 + alpha2 <= 0:
        raise PreconditionError("alpha_1 + alpha_2 = 0")
    e0, e_plus, e_minus = sf_quadratic_eigs(ff, tau, lam, tol)
    alpha_sum = alpha1 + alpha2
    return PerturbativeResult(
        model='sf-quadratic',
        tau=tau,
        lam=lam,
        beta=ff.beta,
        alpha1=alpha1,
        alpha2=alpha2,
        gamma_leading=tau**2 * alpha_sum * lam**2 / 2,
        e0=e0,
        e_plus=e_plus,
        e_minus=e_minus,
        omega_plus_diag=(alpha1 / alpha_sum, alpha2 / alpha_sum),
        ds_plus_leading=sf_quadratic_entropy(ff, tau, lam, tol),
        off_diagonal=_thermal_overlap(ff, tol) * (alpha1 - alpha2) / (2 * alpha_sum),
    )


def _linear_terms(ff, tau, nodes_per_panel):
    r, w = panel_grid(ff.cutoff, nodes_per_panel)
    wf = w * ff.thermal_norm_sq(r)
    boltz = np.exp(-ff.beta * r)
    lower = sinc(tau * (r - 2) / 2) ** 2
    upper = sinc(tau * (r + 2) / 2) ** 2
    alpha1 = np.sum(wf * (boltz * lower + upper))
    alpha2 = np.sum(wf * (boltz * upper + lower))
    # (1 - sinc(tau y)) / y = tau * one_minus_sinc_over(tau y)
    shift = np.sum(w * ff.norm_sq(r) * tau * (one_minus_sinc_over(tau * (2 - r))
                                               + one_minus_sinc_over(tau * (2 + r))))

    rr = r[:, None] + r[None, :]
    pair = wf[:, None] * wf[None, :]
    cross = np.sum(pair * lower[:, None] * upper[None, :] * rr * (1 - np.exp(-ff.beta * rr)))
    diff = (r[None, :] - r[:, None]) * (boltz[:, None] - boltz[None, :])
    same = np.sum(pair * diff * (lower[:, None] * lower[None, :] + upper[:, None] * upper[None, :]))
    return np.array([alpha1, alpha2, shift, cross, same])


def sf_linear_all(ff, tau, lam, tol=DEFAULT_TOLERANCES):
    """
    Rates, eigenvalue expansions and leading entropy production of the linear
    spin-fermion model.
    """
    check_lambda(lam, tol)
    check_tau(tau, tol)
    check_sf1(ff, tol)
    if ff.is_zero:
        raise PreconditionError("alpha_1 + alpha_2 = 0 for a zero form factor")
    alpha1, alpha2, shift, cross, same = _converged(lambda n: _linear_terms(ff, tau, n), 'linear model', tol)
    alpha_sum = alpha1 + alpha2
    lam2 = lam**2
    damping = 1 - lam2 * tau**2 * alpha_sum / 2
    imaginary = lam2 * tau**2 * shift
    ds = lam2 * ff.beta * tau / alpha_sum * (cross + same / 2)
    return PerturbativeResult(
        model='sf-linear',
        tau=tau,
        lam=lam,
        beta=ff.beta,
        alpha1=float(alpha1),
        alpha2=float(alpha2),
        gamma_leading=float(tau**2 * alpha_sum * lam2 / 2),
        e0=complex(1 - lam2 * tau**2 * alpha_sum),
        e_plus=complex(np.exp(2j * tau) * (damping + 1j * imaginary)),
        e_minus=complex(np.exp(-2j * tau) * (damping - 1j * imaginary)),
        omega_plus_diag=(float(alpha1 / alpha_sum), float(alpha2 / alpha_sum)),
        ds_plus_leading=float(ds),
    )


def spinspin_oracle(e_s, e_e, beta_e, tau, lam, coupling, tol=DEFAULT_TOLERANCES):
    """
    Weak-coupling expansions of the spin-spin model with coupling matrix
    I = [[a, b], [c, d]].

    Raises:
        ResonanceError: tau E_E in pi Z
        PreconditionError: alpha_1 + alpha_2 = 0 (no effective ground/excited coupling)
    """
    check_lambda(lam, tol)
    if not np.isfinite(tau) or tau <= 0:
        raise ValueError("tau must be positive")
    phase = tau * e_e / math.pi
    if abs(phase - round(phase)) * math.pi <= tol.resonance:
        raise ResonanceError(f"tau * E_E = {tau * e_e} lies in pi Z")
    coupling = as_square(coupling, 'coupling')
    if coupling.shape != (2, 2):
        raise ValueError("coupling must be a 2x2 matrix")
    a, b, c, d = coupling[0, 0], coupling[0, 1], coupling[1, 0], coupling[1, 1]

    boltz = math.exp(-beta_e * e_e)
    s_minus = float(sinc(tau * (e_e - e_s) / 2)) ** 2
    s_plus = float(sinc(tau * (e_e + e_s) / 2)) ** 2
    s_e = float(sinc(tau * e_e / 2)) ** 2
    alpha1 = abs(b)**2 * s_minus + boltz * abs(c)**2 * s_plus
    alpha2 = boltz * abs(b)**2 * s_minus + abs(c)**2 * s_plus
    alpha_sum = alpha1 + alpha2
    if alpha_sum <= 1e-14:
        raise PreconditionError("alpha_1 + alpha_2 = 0: neither b nor c couples ground and excited states")

    dephasing = abs(a)**2 + abs(d)**2 - 2 * (np.conj(a) * d).real
    gamma0 = min(tau**2 * alpha_sum / (1 + boltz),
                 tau**2 * alpha_sum / (2 * (1 + boltz)) + tau**2 / 2 * s_e * dephasing)
    lam2 = lam**2
    damping = 1 - lam2 * tau**2 / (2 * (1 + boltz)) * (alpha_sum + (1 + boltz) * s_e * dephasing)
    shift = lam2 * tau**2 / (1 + boltz) * (
        (1 - boltz) * float(one_minus_sinc_over(tau * e_e)) * (abs(a)**2 - abs(d)**2)
        + (1 - boltz) * s_e * (np.conj(a) * d).imag
        - (1 + boltz) * float(one_minus_sinc_over(tau * (e_e - e_s))) * abs(b)**2
        + (1 + boltz) * float(one_minus_sinc_over(tau * (e_e + e_s))) * abs(c)**2
    )
    e_plus = complex(np.exp(1j * tau * e_s) * (damping + 1j * shift))
    e_minus = complex(np.exp(-1j * tau * e_s) * (damping - 1j * shift))

    # The last bracket term pairs one difference- and one sum-frequency factor.
    bracket = (abs(b)**2 * (abs(a)**2 + boltz * abs(d)**2) * s_minus * s_e
               + abs(c)**2 * (boltz * abs(a)**2 + abs(d)**2) * s_plus * s_e
               + 2 * abs(b)**2 * abs(c)**2 * (1 + boltz) * s_minus * s_plus)
    ds = lam2 * beta_e * tau * e_e * (1 - boltz) / (alpha_sum * (1 + boltz)) * bracket

    return PerturbativeResult(
        model='spin-spin',
        tau=tau,
        lam=lam,
        beta=beta_e,
        alpha1=float(alpha1),
        alpha2=float(alpha2),
        gamma_leading=float(gamma0 * lam2),
        e0=complex(1 - lam2 * tau**2 * alpha_sum / (1 + boltz)),
        e_plus=e_plus,
        e_minus=e_minus,
        omega_plus_diag=(float(alpha1 / alpha_sum), float(alpha2 / alpha_sum)),
        ds_plus_leading=float(ds),
        gamma0=float(gamma0),
    )


def mc_quadratic_alphas(ff, tau, points=2**23, seed=0, chunk=2**20):
    """
    Quasi-Monte-Carlo re-integration of alpha_1, alpha_2 over the full quadrant.

    Scrambled Sobol points are mapped through an exponential proposal of rate
    ``ff.decay_rate`` in each variable; no truncation radius is involved.
    """
    if points < 1 or chunk < 1:
        raise ValueError("points and chunk must be positive")
    kappa = ff.decay_rate
    sampler = qmc.Sobol(d=2, scramble=True, seed=seed)
    sums = np.zeros(2)
    drawn = 0
    while drawn < points:
        n = min(chunk, points - drawn)
        u = sampler.random(n)
        r = -np.log1p(-u) / kappa
        density = kappa**2 * np.exp(-kappa * (r[:, 0] + r[:, 1]))
        values = (ff.thermal_norm_sq(r[:, 0]) * ff.thermal_norm_sq(r[:, 1])
                  * sinc(tau * (2 - r[:, 0] + r[:, 1]) / 2) ** 2 / density)
        sums += [np.sum(np.exp(-ff.beta * r[:, 0]) * values), np.sum(np.exp(-ff.beta * r[:, 1]) * values)]
        drawn += n
        logger.debug(f"Sobol cross-check: {drawn} of {points} points")
    alpha1, alpha2 = sums / drawn
    return float(alpha1), float(alpha2)


def entropy_integrand_minimum(beta, samples=10_000, seed=0, scale=20.0):
    """Smallest sampled value of (x - y)(e^{-beta y} - e^{-beta x}) over random pairs in [0, scale]^2."""
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(0.0, scale, size=(2, samples))
    return float(np.min((x - y) * (np.exp(-beta * y) - np.exp(-beta * x))))
