"""
Reduced dynamics M = P e^{i tau K} P and everything derived from its spectrum:
ergodicity, gap, invariant covector, the asymptotic state and the tau-periodic
asymptotic expectation of instantaneous observables.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
import pandas as pd

import numerics
from errors import CapacityError, NotErgodic, NumericalFailure
from numerics import as_square, complex_pair, opnorm
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)


@dataclass(eq=False)
class ReducedSpectralData:
    m_matrix: np.ndarray
    eigenvalues: np.ndarray
    ergodic: bool
    gamma: float
    omega_star: np.ndarray | None
    pi_projection: np.ndarray | None
    omega_s: np.ndarray
    reason: str | None = None
    subdominant: float = 0.0

    @property
    def d_s(self):
        return math.isqrt(self.m_matrix.shape[0])

    def require_ergodic(self):
        if not self.ergodic:
            raise NotErgodic(self.reason or 'degenerate-one')

    def to_dict(self):
        return {
            'eigenvalues': [complex_pair(z) for z in self.eigenvalues],
            'ergodic': bool(self.ergodic),
            'gamma': float(self.gamma),
            'subdominant': float(self.subdominant),
            'reason': self.reason,
            'omega_star': None if self.omega_star is None else [complex_pair(z) for z in self.omega_star],
        }


@dataclass(eq=False)
class InstantObservable:
    """
    A_S on the system together with B_{-l}..B_r on the chain elements around
    the one currently interacting, and A_1..A_p on the first elements.
    """
    a_s: np.ndarray
    b_past: list = field(default_factory=list)
    b_zero: np.ndarray | None = None
    b_future: list = field(default_factory=list)
    a_probe: list = field(default_factory=list)

    def __post_init__(self):
        self.a_s = as_square(self.a_s, 'a_s')
        self.b_past = [as_square(b, 'b_past') for b in self.b_past]
        self.b_future = [as_square(b, 'b_future') for b in self.b_future]
        self.a_probe = [as_square(a, 'a_probe') for a in self.a_probe]
        chain = self.b_past + self.b_future + self.a_probe
        if self.b_zero is None:
            if not chain:
                raise ValueError("b_zero is required when the chain dimension cannot be inferred")
            self.b_zero = np.eye(chain[0].shape[0], dtype=complex)
        self.b_zero = as_square(self.b_zero, 'b_zero')
        d_e = self.b_zero.shape[0]
        if any(b.shape != (d_e, d_e) for b in chain):
            raise ValueError("all chain factors must have the same dimension")

    @classmethod
    def identity(cls, d_s, d_e):
        return cls(a_s=np.eye(d_s), b_zero=np.eye(d_e))

    @property
    def ell(self):
        return len(self.b_past)

    @property
    def r(self):
        return len(self.b_future)

    @property
    def p(self):
        return len(self.a_probe)


def reduced_map(model, t=None, tol=DEFAULT_TOLERANCES):
    """
    M(t) = P e^{itK} P on the GNS space of S (t defaults to tau).

    M[a, b] = <e_a (x) Omega_E, e^{itK} e_b (x) Omega_E>.
    """
    t = model.tau if t is None else float(t)
    m = model.compress(model.propagator(t))
    drift = np.linalg.norm(m @ model.omega_s - model.omega_s)
    if drift > tol.fixed_point:
        raise NumericalFailure(f"reduced map does not fix Omega_S (|M Omega - Omega| = {drift:.3g})")
    return m


def spectral_analysis(m_matrix, omega_s, tol_circle=None, tol=DEFAULT_TOLERANCES, strict=True):
    """
    Spectrum, ergodicity, gap and invariant covector of a reduced map.

    Args:
        m_matrix: reduced dynamics operator M
        omega_s: reference vector of S, fixed by M
        tol_circle: distance from the unit circle treated as peripheral (default: tol.circle)
        strict: raise NotErgodic (True) or return data flagged non-ergodic (False)

    Returns:
        ReducedSpectralData
    """
    m_matrix = as_square(m_matrix, 'M')
    omega_s = np.asarray(omega_s, dtype=complex)
    tol_circle = tol.circle if tol_circle is None else tol_circle
    values = numerics.eigenvalues(m_matrix)

    one = int(np.argmin(np.abs(values - 1)))
    if abs(values[one] - 1) > max(tol.unit_one, tol.simple_one):
        raise NumericalFailure("reduced map has no eigenvalue 1")
    others = np.delete(values, one)

    reason = None
    if np.any(np.abs(others - 1) <= tol.simple_one):
        reason = 'degenerate-one'
    elif np.any(np.abs(others) > 1 - tol_circle):
        reason = 'peripheral-eigenvalue'

    moduli = np.abs(others)
    if others.size == 0:
        gamma, subdominant = math.inf, 0.0
    else:
        with np.errstate(divide='ignore'):
            gamma = float(np.min(np.abs(np.log(moduli))))
        subdominant = float(np.max(moduli))

    omega_star = pi_projection = None
    if reason is None:
        _, _, vh = np.linalg.svd(m_matrix.conj().T - np.eye(m_matrix.shape[0]))
        null = vh[-1].conj()
        omega_star = null / np.conj(np.vdot(null, omega_s))
        pi_projection = np.outer(omega_s, omega_star.conj())
        left_residual = np.linalg.norm(m_matrix.conj().T @ omega_star - omega_star)
        logger.debug(f"invariant covector residual {left_residual:.2e}")

    data = ReducedSpectralData(
        m_matrix=m_matrix,
        eigenvalues=values,
        ergodic=reason is None,
        gamma=gamma,
        omega_star=omega_star,
        pi_projection=pi_projection,
        omega_s=omega_s,
        reason=reason,
        subdominant=subdominant,
    )
    logger.debug(f"spectrum {np.round(values, 10)}, gamma={gamma}, reason={reason}")
    if reason is not None and strict:
        raise NotErgodic(reason)
    return data


def analyze_model(model, tol=DEFAULT_TOLERANCES, strict=True):
    return spectral_analysis(reduced_map(model, tol=tol), model.omega_s, tol=tol, strict=strict)


def asymptotic_expectation(data, a_s):
    """omega_+(A_S) = <Omega*_S, (A_S (x) I) Omega_S>."""
    data.require_ergodic()
    a_s = as_square(a_s, 'a_s')
    left = np.kron(a_s, np.eye(data.d_s))
    return complex(np.vdot(data.omega_star, left @ data.omega_s))


def asymptotic_density(data):
    """Density matrix rho_+ with Tr(rho_+ A) = omega_+(A)."""
    data.require_ergodic()
    d = data.d_s
    weights = data.omega_star.reshape(d, d).conj() @ data.omega_s.reshape(d, d).T
    rho = weights.T
    return (rho + rho.conj().T) / 2


def rias_expectation(model, data, obs, s, tol=DEFAULT_TOLERANCES):
    """
    Asymptotic tau-periodic expectation E_+(s) of an instantaneous observable.

    Propagates Omega*_S and Omega_S (each tensored with l+1 copies of Omega_E)
    factor-locally through l full interactions and a partial one of length s,
    then sandwiches A_S (x) B_{-l} (x) ... (x) B_0. Future factors contribute
    their reference expectations.
    """
    data.require_ergodic()
    if obs.a_probe:
        raise ValueError("asymptotic expectation takes no A_1..A_p factors")
    s = float(s)
    if not 0 <= s < model.tau:
        raise ValueError(f"s must lie in [0, tau), got {s}")
    ell = obs.ell
    ds2, de2 = model.d_s**2, model.d_e**2
    dims = [ds2] + [de2] * (ell + 1)
    if math.prod(dims) > tol.max_vector_dim:
        raise CapacityError(f"{ell} past factors need a vector of length {math.prod(dims)}")

    bra = numerics.kron_all([data.omega_star.reshape(-1, 1)] + [model.omega_e.reshape(-1, 1)] * (ell + 1))[:, 0]
    ket = numerics.kron_all([model.omega_s.reshape(-1, 1)] + [model.omega_e.reshape(-1, 1)] * (ell + 1))[:, 0]

    coupled_full = numerics.evolution(model.l_total, model.tau)
    free_full = numerics.evolution(model.sys_e.liouvillean, model.tau)
    coupled_part = numerics.evolution(model.l_total, s)
    free_part = numerics.evolution(model.sys_e.liouvillean, s)
    for element in range(1, ell + 2):
        coupled, free = (coupled_full, free_full) if element <= ell else (coupled_part, free_part)
        for k in range(1, ell + 2):
            if k == element:
                bra = numerics.apply_local(coupled, bra, dims, (0, k))
                ket = numerics.apply_local(coupled, ket, dims, (0, k))
            else:
                bra = numerics.apply_local(free, bra, dims, (k,))
                ket = numerics.apply_local(free, ket, dims, (k,))

    ket = numerics.apply_local(np.kron(obs.a_s, np.eye(model.d_s)), ket, dims, (0,))
    for k, b in enumerate(obs.b_past + [obs.b_zero], start=1):
        ket = numerics.apply_local(model.sys_e.left(b), ket, dims, (k,))
    value = complex(np.vdot(bra, ket))
    for b in obs.b_future:
        value *= model.sys_e.expectation(b)
    return value


def correlation_limit(model, data, a_value, obs, s, tol=DEFAULT_TOLERANCES):
    """
    Limiting correlation omega(A) * E_+(s) for an observable A on the first chain
    elements with initial expectation ``a_value``.
    """
    return complex(a_value) * rias_expectation(model, data, obs, s, tol)


def reconstruct_expectation(c_plus, e_plus, tol=DEFAULT_TOLERANCES):
    """Recover omega(A) = C_+ / E_+ from a limiting correlation."""
    if abs(e_plus) <= tol.reconstruction_floor:
        raise ValueError("asymptotic expectation vanishes; initial state cannot be reconstructed")
    return complex(c_plus) / complex(e_plus)


def power_convergence(data, m_max):
    """
    Distances |M^m - pi| for m = 1..m_max.

    Returns:
        DataFrame with columns m, norm, envelope (running max taken from the tail)
    """
    data.require_ergodic()
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    power = np.eye(data.m_matrix.shape[0], dtype=complex)
    rows = []
    for m in range(1, m_max + 1):
        power = power @ data.m_matrix
        rows.append({'m': m, 'norm': opnorm(power - data.pi_projection)})
    frame = pd.DataFrame(rows)
    frame['envelope'] = frame['norm'][::-1].cummax()[::-1]
    return frame


def fit_decay_rate(frame, floor=1e-13):
    """Exponential rate from a log-linear fit over the last half of a power_convergence frame."""
    tail = frame.iloc[len(frame) // 2:]
    tail = tail[tail['norm'] > floor]
    if len(tail) < 2:
        return math.inf
    slope, _ = np.polyfit(tail['m'].to_numpy(dtype=float), np.log(tail['norm'].to_numpy()), 1)
    return float(-slope)


def factorization_check(model, t1, t2, tol=DEFAULT_TOLERANCES):
    """
    |P e^{i t1 K_1} e^{i t2 K_2} P - (P e^{i t1 K} P)(P e^{i t2 K} P)| on S + two chain elements.
    """
    ds2, de2 = model.d_s**2, model.d_e**2
    dims = [ds2, de2, de2]
    total = math.prod(dims)
    if total > tol.max_two_element_dim:
        raise CapacityError(f"two-element space of dimension {total} is too large")
    second = numerics.embed(model.propagator(t2), dims, (0, 2))
    product = numerics.apply_local(model.propagator(t1), second, dims, (0, 1))
    blocks = product.reshape(ds2, de2, de2, ds2, de2, de2)
    omega_e = model.omega_e
    compressed = np.einsum('i,j,aijbkl,k,l->ab', omega_e.conj(), omega_e.conj(), blocks, omega_e, omega_e)
    expected = reduced_map(model, t1, tol) @ reduced_map(model, t2, tol)
    return opnorm(compressed - expected)


def power_bound_check(model, t_samples, m_max, tol=DEFAULT_TOLERANCES):
    """Largest |(P e^{itK} P)^m| over the sampled t and 1 <= m <= m_max."""
    worst = 0.0
    for t in t_samples:
        step = reduced_map(model, t, tol)
        power = np.eye(step.shape[0], dtype=complex)
        for m in range(1, m_max + 1):
            power = power @ step
            worst = max(worst, opnorm(power))
        logger.debug(f"power bound at t={t}: running max {worst:.4f}")
    return worst
