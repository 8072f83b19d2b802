"""
GNS-doubled representation of finite quantum systems and the repeated
interaction model built on it.

Conventions: vec(|x><y|) = x (x) conj(y), so the left action of A is A (x) I
and the right action of B is I (x) B^T. The standard Liouvillean is
L = h (x) I - I (x) h^T and the modular conjugation is J = swap o conj.
Two-system spaces use the factor order (S-left, S-right, E-left, E-right).
"""

from collections import OrderedDict
from dataclasses import dataclass
import logging

import numpy as np

import numerics
from errors import NumericalFailure
from numerics import as_square, is_hermitian, opnorm
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)

# least recently used interval propagators are evicted beyond this many durations
PROPAGATOR_CACHE_SIZE = 64

RAISING = np.array([[0, 0], [1, 0]], dtype=complex)
LOWERING = RAISING.T.copy()


@dataclass(frozen=True, eq=False)
class GnsSystem:
    d: int
    h: np.ndarray
    beta: float
    energies: np.ndarray
    basis: np.ndarray
    omega: np.ndarray
    liouvillean: np.ndarray
    delta_half: np.ndarray
    delta_half_inv: np.ndarray
    swap: np.ndarray

    def left(self, a):
        return np.kron(as_square(a), np.eye(self.d))

    def right(self, b):
        return np.kron(np.eye(self.d), as_square(b).T)

    def gibbs(self):
        """Physical density matrix of the reference state."""
        return gibbs_state(self.h, self.beta)

    def expectation(self, a):
        return complex(np.vdot(self.omega, self.left(a) @ self.omega))


def gibbs_state(h, beta):
    """e^{-beta h} / Z for Hermitian h."""
    energies, basis = np.linalg.eigh(as_square(h, 'h'))
    weights = np.exp(-float(beta) * (energies - energies.min()))
    weights /= weights.sum()
    return (basis * weights) @ basis.conj().T


def swap_matrix(d):
    """Permutation x (x) y -> y (x) x on C^d (x) C^d."""
    perm = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            perm[j * d + i, i * d + j] = 1.0
    return perm


def j_conjugate(x, swap):
    """J X J for a linear X, with J = swap o (entrywise conjugation)."""
    return swap @ np.conj(x) @ swap


def build_gns_system(h, beta, tol=DEFAULT_TOLERANCES):
    """
    Double a finite system at inverse temperature ``beta``.

    Args:
        h: d x d Hermitian Hamiltonian (diagonalized internally)
        beta: inverse temperature, >= 0

    Returns:
        GnsSystem
    """
    h = as_square(h, 'h')
    if not is_hermitian(h, tol.hermitian):
        raise ValueError("h must be Hermitian")
    beta = float(beta)
    if not np.isfinite(beta) or beta < 0:
        raise ValueError("beta must be a finite number >= 0")
    h = (h + h.conj().T) / 2
    d = h.shape[0]

    energies, basis = np.linalg.eigh(h)
    amplitudes = np.exp(-beta * (energies - energies.min()) / 2)
    amplitudes /= np.sqrt(np.sum(amplitudes**2))
    omega = np.zeros(d * d, dtype=complex)
    for i in range(d):
        omega += amplitudes[i] * np.kron(basis[:, i], basis[:, i].conj())

    identity = np.eye(d)
    liouvillean = np.kron(h, identity) - np.kron(identity, h.T)
    delta_half = numerics.expm(-(beta / 2) * liouvillean, tol)
    delta_half_inv = numerics.expm((beta / 2) * liouvillean, tol)

    system = GnsSystem(
        d=d,
        h=h,
        beta=beta,
        energies=energies,
        basis=basis,
        omega=omega,
        liouvillean=liouvillean,
        delta_half=delta_half,
        delta_half_inv=delta_half_inv,
        swap=swap_matrix(d),
    )
    kernel = np.linalg.norm(liouvillean @ omega)
    if kernel > tol.liouvillean_kernel * (1 + opnorm(h)):
        raise NumericalFailure(f"reference vector not annihilated by L (|L omega| = {kernel:.3g})")
    if abs(np.linalg.norm(omega) - 1) > tol.omega_norm:
        raise NumericalFailure("reference vector is not normalized")
    logger.debug(f"GNS system d={d}, beta={beta}, energies={energies}")
    return system


def physical_interaction(terms, d_s, d_e):
    """Sum of A_k (x) B_k on C^{d_S} (x) C^{d_E}."""
    v = np.zeros((d_s * d_e, d_s * d_e), dtype=complex)
    for a, b in terms:
        a = as_square(a, 'interaction A')
        b = as_square(b, 'interaction B')
        if a.shape != (d_s, d_s) or b.shape != (d_e, d_e):
            raise ValueError(f"interaction term shapes {a.shape}, {b.shape} do not match ({d_s}, {d_e})")
        v += np.kron(a, b)
    return v


def build_interaction(terms, d_s, d_e, tol=DEFAULT_TOLERANCES):
    """
    GNS interaction sum_k A_k (x) I (x) B_k (x) I.

    Args:
        terms: list of (A, B) pairs, A d_S x d_S and B d_E x d_E
        d_s, d_e: physical dimensions

    Raises:
        ValueError: when sum_k A_k (x) B_k is not Hermitian
    """
    if not is_hermitian(physical_interaction(terms, d_s, d_e), tol.hermitian):
        raise ValueError("interaction must be Hermitian")
    v = np.zeros((d_s**2 * d_e**2,) * 2, dtype=complex)
    for a, b in terms:
        v += numerics.kron_all([a, np.eye(d_s), b, np.eye(d_e)])
    return v


def check_left_support(v, d_s, d_e, samples=3, seed=0, tol=DEFAULT_TOLERANCES):
    """True when v commutes with sampled right-factor unitaries I (x) U_S (x) I (x) U_E."""
    rng = np.random.default_rng(seed)
    scale = max(1.0, opnorm(v))
    for _ in range(samples):
        u_s, _ = np.linalg.qr(rng.normal(size=(d_s, d_s)) + 1j * rng.normal(size=(d_s, d_s)))
        u_e, _ = np.linalg.qr(rng.normal(size=(d_e, d_e)) + 1j * rng.normal(size=(d_e, d_e)))
        right = numerics.kron_all([np.eye(d_s), u_s, np.eye(d_e), u_e])
        if opnorm(v @ right - right @ v) > tol.commutant * scale:
            return False
    return True


def c_liouvillean(sys_s, sys_e, v, lam):
    """
    C-Liouvillean K = L_S + L_E + lam V - lam J W_raw J with W_raw = Delta^{1/2} V Delta^{-1/2}.

    Returns:
        (K, W, norm of W_raw, condition number of Delta^{1/2}) where W = K - L
    """
    id_s = np.eye(sys_s.d**2)
    id_e = np.eye(sys_e.d**2)
    free = np.kron(sys_s.liouvillean, id_e) + np.kron(id_s, sys_e.liouvillean)
    delta_half = np.kron(sys_s.delta_half, sys_e.delta_half)
    delta_half_inv = np.kron(sys_s.delta_half_inv, sys_e.delta_half_inv)
    w_raw = delta_half @ v @ delta_half_inv
    w = -lam * j_conjugate(w_raw, np.kron(sys_s.swap, sys_e.swap))
    k = free + lam * v + w
    return k, w, opnorm(w_raw), float(np.linalg.cond(delta_half))


class RepeatedInteractionModel:
    def __init__(self, h_s, h_e, terms, lam, tau, beta_s=0.0, beta_e=1.0,
                 verbose=False, tol=DEFAULT_TOLERANCES):
        """
        Small system S repeatedly coupled to identical chain elements E.

        Args:
            h_s: Hamiltonian of S (d_S x d_S, Hermitian)
            h_e: Hamiltonian of one chain element (d_E x d_E, Hermitian)
            terms: interaction as a list of (A, B) with v = sum A (x) B
            lam: coupling constant
            tau: duration of one interaction (> 0)
            beta_s: inverse temperature of the reference state of S (default: 0, tracial)
            beta_e: inverse temperature of the chain elements
            verbose: Whether to log a model summary (default: False)
        """
        tau = float(tau)
        if not np.isfinite(tau) or tau <= 0:
            raise ValueError("tau must be positive")
        lam = float(lam)
        if not np.isfinite(lam):
            raise ValueError("lambda must be finite")
        self.tol = tol
        self.lam = lam
        self.tau = tau
        self.verbose = verbose
        self.sys_s = build_gns_system(h_s, beta_s, tol)
        self.sys_e = build_gns_system(h_e, beta_e, tol)
        self.d_s = self.sys_s.d
        self.d_e = self.sys_e.d
        self.h_s = self.sys_s.h
        self.h_e = self.sys_e.h
        self.terms = [(as_square(a), as_square(b)) for a, b in terms]
        self.v_phys = physical_interaction(self.terms, self.d_s, self.d_e)
        self.v = build_interaction(self.terms, self.d_s, self.d_e, tol)

        id_s = np.eye(self.d_s**2)
        id_e = np.eye(self.d_e**2)
        self.l_free = np.kron(self.sys_s.liouvillean, id_e) + np.kron(id_s, self.sys_e.liouvillean)
        self.l_total = self.l_free + lam * self.v
        self.k_total, self.w, self.w_raw_norm, self.delta_condition = c_liouvillean(
            self.sys_s, self.sys_e, self.v, lam
        )
        self.omega = np.kron(self.sys_s.omega, self.sys_e.omega)
        self._propagators = OrderedDict()

        kernel = np.linalg.norm(self.k_total @ self.omega)
        bound = tol.k_kernel * (1 + opnorm(self.h_s) + opnorm(self.h_e) + abs(lam) * opnorm(self.v))
        if kernel > bound:
            raise NumericalFailure(f"K does not annihilate the reference vector (|K omega| = {kernel:.3g})")

        if verbose:
            logger.info("Repeated interaction model:")
            logger.info(f"System dimension d_S: {self.d_s}, chain element dimension d_E: {self.d_e}")
            logger.info(f"Coupling lambda: {self.lam}, interaction time tau: {self.tau}")
            logger.info(f"beta_S: {self.sys_s.beta}, beta_E: {self.sys_e.beta}")
            logger.info(f"|K omega|: {kernel:.3e}, |Delta^1/2 V Delta^-1/2|: {self.w_raw_norm:.4f}")
            logger.info(f"Condition number of Delta^1/2: {self.delta_condition:.3e}")

    @property
    def omega_s(self):
        return self.sys_s.omega

    @property
    def omega_e(self):
        return self.sys_e.omega

    def propagator(self, t):
        """e^{itK} on the S+E GNS space."""
        return numerics.expm(1j * t * self.k_total, self.tol)

    def compress(self, x):
        """P X P: sandwich the E factors of an S+E GNS operator with Omega_E."""
        ds2, de2 = self.d_s**2, self.d_e**2
        blocks = np.asarray(x).reshape(ds2, de2, ds2, de2)
        return np.einsum('i,aibj,j->ab', self.omega_e.conj(), blocks, self.omega_e)

    def interaction_hamiltonian(self):
        """h_S (x) I + I (x) h_E + lam v on C^{d_S} (x) C^{d_E}."""
        return (np.kron(self.h_s, np.eye(self.d_e)) + np.kron(np.eye(self.d_s), self.h_e)
                + self.lam * self.v_phys)

    def interval_propagators(self, delta):
        """(coupled S+E step, free E step) over a duration ``delta``."""
        key = round(float(delta), 15)
        if key in self._propagators:
            self._propagators.move_to_end(key)
            return self._propagators[key]
        pair = (
            numerics.evolution(self.interaction_hamiltonian(), delta),
            numerics.evolution(self.h_e, delta),
        )
        self._propagators[key] = pair
        if len(self._propagators) > PROPAGATOR_CACHE_SIZE:
            self._propagators.popitem(last=False)
        return pair


def spin_spin_model(e_s, e_e, beta_e, tau, lam, coupling=((0, 1), (1, 0)), beta_s=0.0,
                    verbose=False, tol=DEFAULT_TOLERANCES):
    """
    Two-level system coupled to two-level chain elements.

    h_S = diag(0, E_S), h_E = diag(0, E_E), v = I (x) a* + I^dagger (x) a where
    a* raises the chain element and ``coupling`` is the 2x2 matrix I = [[a, b], [c, d]].
    """
    if e_s < 0 or e_e < 0:
        raise ValueError("level energies must be non-negative")
    coupling = as_square(coupling, 'coupling')
    if coupling.shape != (2, 2):
        raise ValueError("coupling must be a 2x2 matrix")
    terms = [(coupling, RAISING), (coupling.conj().T, LOWERING)]
    return RepeatedInteractionModel(
        h_s=np.diag([0.0, e_s]),
        h_e=np.diag([0.0, e_e]),
        terms=terms,
        lam=lam,
        tau=tau,
        beta_s=beta_s,
        beta_e=beta_e,
        verbose=verbose,
        tol=tol,
    )
