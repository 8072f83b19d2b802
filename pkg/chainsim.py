"""
Exact finite-chain simulation of the repeated interaction dynamics.

The state is a physical density matrix on C^{d_S} (x) C^{d_E} (x) ... (x) C^{d_E}
with N chain elements; factor 0 is S and factor k is the k-th chain element.
During (m tau, (m+1) tau) the system interacts with element m+1 while every
other element evolves freely.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
import pandas as pd

import numerics
from errors import CapacityError, NumericalFailure, PreconditionError
from gns import gibbs_state
from numerics import as_square, is_hermitian
from reduced import rias_expectation
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)


@dataclass(frozen=True, eq=False)
class ChainState:
    """Density matrix of S plus N elements at time ``clock``; ``step`` full intervals are done."""
    rho: np.ndarray
    n_elements: int
    step: int
    clock: float
    model: object

    @property
    def dims(self):
        return [self.model.d_s] + [self.model.d_e] * self.n_elements

    @property
    def offset(self):
        """Time s elapsed inside the current interval."""
        return self.clock - self.step * self.model.tau

    def system_density(self, tol=DEFAULT_TOLERANCES):
        return numerics.partial_trace(self.rho, self.dims, [0], tol)


def validate_density(rho, d, name='rho', tol=DEFAULT_TOLERANCES):
    rho = as_square(rho, name)
    if rho.shape != (d, d):
        raise ValueError(f"{name} must be {d}x{d}, got {rho.shape}")
    if not is_hermitian(rho, tol.input_hermitian):
        raise ValueError(f"{name} must be Hermitian")
    if abs(np.trace(rho) - 1) > tol.trace:
        raise ValueError(f"{name} must have unit trace")
    rho = (rho + rho.conj().T) / 2
    if np.linalg.eigvalsh(rho)[0] < -tol.positivity:
        raise ValueError(f"{name} must be positive semidefinite")
    return rho


def init_chain(model, n_elements, rho_s_init, tol=DEFAULT_TOLERANCES):
    """
    Product state rho_S (x) rho_E^{(x) N} at time 0.

    Args:
        model: RepeatedInteractionModel
        n_elements: number N of simulated chain elements (>= 0)
        rho_s_init: initial density matrix of S

    Raises:
        CapacityError: when d_S * d_E^N exceeds tol.max_chain_dim
    """
    if isinstance(n_elements, bool) or int(n_elements) != n_elements or n_elements < 0:
        raise ValueError("n_elements must be a non-negative integer")
    n_elements = int(n_elements)
    total = model.d_s * model.d_e**n_elements
    if total > tol.max_chain_dim:
        raise CapacityError(f"chain of {n_elements} elements has dimension {total} > {tol.max_chain_dim}")
    rho_s = validate_density(rho_s_init, model.d_s, 'rho_s_init', tol)
    rho = numerics.kron_all([rho_s] + [model.sys_e.gibbs()] * n_elements)
    logger.debug(f"chain initialized with N={n_elements}, dimension {total}")
    return ChainState(rho=rho, n_elements=n_elements, step=0, clock=0.0, model=model)


def _propagate(matrix, model, n_elements, step, clock, t, tol):
    """Advance a (not necessarily Hermitian) chain matrix from ``clock`` to ``t``."""
    tau = model.tau
    dims = [model.d_s] + [model.d_e] * n_elements
    while clock < t - tol.clock:
        boundary = (step + 1) * tau
        end = min(t, boundary)
        if boundary - end <= tol.clock:
            end = boundary
        element = step + 1
        if element > n_elements:
            raise CapacityError(f"time {t} needs chain element {element} but only {n_elements} are simulated")
        coupled, free = model.interval_propagators(end - clock)
        matrix = numerics.conjugate_local(coupled, matrix, dims, (0, element))
        for k in range(1, n_elements + 1):
            if k != element:
                matrix = numerics.conjugate_local(free, matrix, dims, (k,))
        if end == boundary:
            step, clock = step + 1, boundary
        else:
            clock = end
    return matrix, step, clock


def evolve_to(state, t, tol=DEFAULT_TOLERANCES):
    """
    Schroedinger evolution of ``state`` up to time ``t``.

    Raises:
        ValueError: when t lies before the state's clock
        CapacityError: when t needs more chain elements than were simulated
    """
    t = float(t)
    if t < state.clock - tol.clock:
        raise ValueError(f"cannot evolve backwards from {state.clock} to {t}")
    model = state.model
    if t > state.n_elements * model.tau + tol.clock:
        raise CapacityError(f"time {t} exceeds the {state.n_elements} simulated intervals")
    rho, step, clock = _propagate(state.rho, model, state.n_elements, state.step, state.clock, t, tol)
    trace = np.trace(rho)
    if abs(trace - 1) > tol.unitarity:
        raise NumericalFailure(f"trace drifted to {trace:.12g} during evolution")
    return ChainState(rho=rho, n_elements=state.n_elements, step=step, clock=clock, model=model)


def _placements(obs, step, n_elements):
    """(factor, operator) pairs for an instantaneous observable at interval ``step``."""
    current = step + 1
    first = current - obs.ell
    last = current + obs.r
    if first < 1 or last > n_elements:
        raise PreconditionError(
            f"observable spans chain elements {first}..{last}, outside 1..{n_elements}"
        )
    if obs.p and obs.p >= first:
        raise PreconditionError(f"factors A_1..A_{obs.p} overlap the interacting window starting at {first}")
    placed = [(0, obs.a_s)]
    placed += [(first + i, b) for i, b in enumerate(obs.b_past + [obs.b_zero] + obs.b_future)]
    placed += [(i + 1, a) for i, a in enumerate(obs.a_probe)]
    return placed


def _placed_trace(matrix, dims, placed):
    out = matrix
    for factor, op in placed:
        out = numerics.apply_local(op, out, dims, (factor,))
    return complex(np.trace(out))


def _check_observable(model, obs):
    if obs.a_s.shape != (model.d_s, model.d_s) or obs.b_zero.shape != (model.d_e, model.d_e):
        raise ValueError("observable dimensions do not match the model")


def expect(state, obs):
    """Tr[rho(t) X] for an instantaneous observable placed around the interacting element."""
    _check_observable(state.model, obs)
    placed = _placements(obs, state.step, state.n_elements)
    return _placed_trace(state.rho, state.dims, placed)


def correlation(model, n_elements, rho_s_init, a_pre, obs, t, tol=DEFAULT_TOLERANCES):
    """
    Tr[rho_0 A alpha^t(X)] for A acting on S and the first q chain elements at time 0.

    Args:
        a_pre: operator on C^{d_S} (x) C^{d_E}^{(x) q}, q inferred from its dimension
        obs: InstantObservable X evaluated at time t
    """
    _check_observable(model, obs)
    a_pre = as_square(a_pre, 'a_pre')
    size = a_pre.shape[0]
    q = 0
    while model.d_s * model.d_e**q < size:
        q += 1
    if model.d_s * model.d_e**q != size:
        raise ValueError(f"a_pre dimension {size} is not d_S * d_E^q")
    if q > n_elements:
        raise ValueError(f"a_pre acts on {q} elements but only {n_elements} are simulated")
    state = init_chain(model, n_elements, rho_s_init, tol)
    t = float(t)
    if t < 0 or t > n_elements * model.tau + tol.clock:
        raise CapacityError(f"time {t} outside the simulated range")
    # rho_0 A = (A^dagger rho_0)^dagger
    weighted = numerics.apply_local(a_pre.conj().T, state.rho, state.dims, tuple(range(q + 1))).conj().T
    weighted, step, _ = _propagate(weighted, model, n_elements, 0, 0.0, t, tol)
    return _placed_trace(weighted, state.dims, _placements(obs, step, n_elements))


def _at_boundary(state, tol):
    k = state.step
    if abs(state.clock - k * state.model.tau) > tol.clock:
        raise PreconditionError(f"state at t={state.clock} is not at an interaction boundary")
    return k


def energy_jump(state, tol=DEFAULT_TOLERANCES):
    """j(k) = Tr[rho(k tau) lam (v_{k+1} - v_k)] for a state sitting at t = k tau, 1 <= k < N."""
    k = _at_boundary(state, tol)
    if not 1 <= k < state.n_elements:
        raise ValueError(f"energy jump needs 1 <= k < N, got k={k}, N={state.n_elements}")
    model = state.model
    coupling = model.lam * model.v_phys
    incoming = numerics.apply_local(coupling, state.rho, state.dims, (0, k + 1))
    outgoing = numerics.apply_local(coupling, state.rho, state.dims, (0, k))
    return float(np.real(np.trace(incoming) - np.trace(outgoing)))


def energy_jumps(model, n_elements, rho_s_init, k_max=None, tol=DEFAULT_TOLERANCES):
    """
    Energy supplied at each switching time.

    Returns:
        DataFrame with columns k, t, jump, cumulative
    """
    k_max = n_elements - 1 if k_max is None else int(k_max)
    if k_max >= n_elements:
        raise CapacityError(f"k_max={k_max} needs more than {n_elements} elements")
    state = init_chain(model, n_elements, rho_s_init, tol)
    rows = []
    for k in range(1, k_max + 1):
        state = evolve_to(state, k * model.tau, tol)
        rows.append({'k': k, 't': k * model.tau, 'jump': energy_jump(state, tol)})
    frame = pd.DataFrame(rows, columns=['k', 't', 'jump'])
    frame['cumulative'] = frame['jump'].cumsum()
    return frame


def cumulative_energy(jumps, times, tau):
    """Delta E(t) = sum_{k <= floor(t / tau)} j(k) for each t, from an energy_jumps frame."""
    values = jumps['jump'].to_numpy(dtype=float)
    out = []
    for t in np.atleast_1d(times):
        m = math.floor(float(t) / tau + 1e-12)
        if m > len(values):
            raise ValueError(f"time {t} needs {m} jumps, only {len(values)} given")
        out.append(float(values[:m].sum()))
    return np.array(out)


def energy_slope(jumps, k_min=1):
    """Least-squares slope of the cumulative energy per unit time."""
    tail = jumps[jumps['k'] >= k_min]
    if len(tail) < 2:
        raise ValueError("need at least two jumps to fit a slope")
    slope, _ = np.polyfit(tail['t'].to_numpy(dtype=float), tail['cumulative'].to_numpy(dtype=float), 1)
    return float(slope)


def _reference(model, n_elements, beta_s, beta_e):
    beta_s = model.sys_s.beta if beta_s is None else beta_s
    beta_e = model.sys_e.beta if beta_e is None else beta_e
    return [gibbs_state(model.h_s, beta_s)] + [gibbs_state(model.h_e, beta_e)] * n_elements


def relative_entropy(state, beta_s=None, beta_e=None, tol=DEFAULT_TOLERANCES):
    """
    Ent(rho(t) | rho_0) = Tr[rho log rho] - Tr[rho log rho_0] against the product reference.

    The reference is Gibbs(beta_S, h_S) (x) Gibbs(beta_E, h_E)^{(x) N}; both inverse
    temperatures default to the model's.
    """
    rho = state.rho
    if not is_hermitian(rho, tol.input_hermitian):
        raise ValueError("chain density matrix lost hermiticity")
    spectrum = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if spectrum[0] < -tol.positivity:
        raise ValueError(f"chain density matrix has eigenvalue {spectrum[0]:.3g}")
    spectrum = np.clip(spectrum, 0.0, None)
    negentropy = float(np.sum(spectrum * np.log(np.maximum(spectrum, tol.log_floor))))
    cross = 0.0
    for factor, reference in enumerate(_reference(state.model, state.n_elements, beta_s, beta_e)):
        marginal = numerics.partial_trace(rho, state.dims, [factor], tol)
        cross += float(np.real(np.trace(marginal @ numerics.logm_psd(reference, tol.log_floor, tol))))
    return negentropy - cross


def total_energy(state, element=None):
    """<h_S + sum_k h_{E,k} + lam v_element>, element defaulting to the interacting one."""
    model = state.model
    element = state.step + 1 if element is None else int(element)
    if not 1 <= element <= state.n_elements:
        raise ValueError(f"element {element} outside 1..{state.n_elements}")
    dims = state.dims
    value = np.trace(numerics.apply_local(model.h_s, state.rho, dims, (0,)))
    for k in range(1, state.n_elements + 1):
        value += np.trace(numerics.apply_local(model.h_e, state.rho, dims, (k,)))
    value += np.trace(numerics.apply_local(model.lam * model.v_phys, state.rho, dims, (0, element)))
    return float(np.real(value))


def _balance_observable(state):
    model = state.model
    beta_s, beta_e = model.sys_s.beta, model.sys_e.beta
    dims = state.dims
    coupling = numerics.apply_local(beta_e * model.lam * model.v_phys, state.rho, dims, (0, state.step + 1))
    local = numerics.apply_local((beta_e - beta_s) * model.h_s, state.rho, dims, (0,))
    return float(np.real(np.trace(coupling) + np.trace(local)))


def entropy_balance(model, n_elements, rho_s_init, times, tol=DEFAULT_TOLERANCES):
    """
    Entropy, supplied energy and the balance residual
    Ent(t) - Ent(0) - [beta_E Delta E(t) - <X(t)>_t + <X(0)>_0]
    with X(t) = beta_E lam v_{m(t)+1} + (beta_E - beta_S) h_S.

    Returns:
        DataFrame with columns t, entropy, delta_energy, x_expectation, residual
    """
    times = sorted(float(t) for t in times)
    if times and times[-1] >= n_elements * model.tau - tol.clock:
        raise CapacityError("balance times must stay below N tau")
    state = init_chain(model, n_elements, rho_s_init, tol)
    entropy0 = relative_entropy(state, tol=tol)
    x0 = _balance_observable(state)
    beta_e = model.sys_e.beta
    delta_energy = 0.0
    next_k = 1
    rows = []
    for t in times:
        while next_k * model.tau <= t + tol.clock:
            state = evolve_to(state, next_k * model.tau, tol)
            delta_energy += energy_jump(state, tol)
            next_k += 1
        state = evolve_to(state, t, tol)
        entropy = relative_entropy(state, tol=tol)
        x_t = _balance_observable(state)
        residual = entropy - entropy0 - (beta_e * delta_energy - x_t + x0)
        rows.append({'t': t, 'entropy': entropy, 'delta_energy': delta_energy,
                     'x_expectation': x_t, 'residual': residual})
    return pd.DataFrame(rows, columns=['t', 'entropy', 'delta_energy', 'x_expectation', 'residual'])


def entropy_derivative(state):
    """d/dt Ent(t) = -<i [beta_S h_S + beta_E h_{E,m+1}, lam v_{m+1}]> inside an interval."""
    model = state.model
    d_s, d_e = model.d_s, model.d_e
    local = (model.sys_s.beta * np.kron(model.h_s, np.eye(d_e))
             + model.sys_e.beta * np.kron(np.eye(d_s), model.h_e))
    coupling = model.lam * model.v_phys
    commutator = 1j * (local @ coupling - coupling @ local)
    value = np.trace(numerics.apply_local(commutator, state.rho, state.dims, (0, state.step + 1)))
    return -float(np.real(value))


def cptp_step(model, rho_s, tol=DEFAULT_TOLERANCES):
    """One interaction: Tr_E[U (rho_S (x) rho_E) U^dagger] with U = e^{-i tau (h_S + h_E + lam v)}."""
    rho_s = validate_density(rho_s, model.d_s, 'rho_s', tol)
    coupled, _ = model.interval_propagators(model.tau)
    joint = coupled @ np.kron(rho_s, model.sys_e.gibbs()) @ coupled.conj().T
    return numerics.partial_trace(joint, [model.d_s, model.d_e], [0], tol)


def _channel(model, x):
    coupled, _ = model.interval_propagators(model.tau)
    joint = coupled @ np.kron(x, model.sys_e.gibbs()) @ coupled.conj().T
    blocks = joint.reshape(model.d_s, model.d_e, model.d_s, model.d_e)
    return np.einsum('aibi->ab', blocks)


def cptp_superoperator(model):
    """Matrix of the one-step channel on row-major vec(rho_S)."""
    d = model.d_s
    columns = []
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            columns.append(_channel(model, unit).reshape(-1))
    return np.array(columns).T


def cptp_fixed_point(model, steps=None, rho0=None, tol=DEFAULT_TOLERANCES):
    """
    Invariant density of the one-step channel.

    With ``steps`` the channel is iterated from ``rho0`` (default: maximally mixed);
    otherwise the null vector of (superoperator - I) is taken.
    """
    d = model.d_s
    if steps is not None:
        rho = np.eye(d, dtype=complex) / d if rho0 is None else rho0
        for _ in range(int(steps)):
            rho = cptp_step(model, rho, tol)
        return rho
    _, _, vh = np.linalg.svd(cptp_superoperator(model) - np.eye(d * d))
    rho = vh[-1].conj().reshape(d, d)
    rho = rho / np.trace(rho)
    return (rho + rho.conj().T) / 2


def simulate_trajectory(model, data, n_elements, rho_s_init, obs, steps, points_per_interval=4,
                        tol=DEFAULT_TOLERANCES):
    """
    Chain expectations against the asymptotic tau-periodic prediction.

    Samples t = m tau + s for m = l..steps-1 and ``points_per_interval`` offsets s.

    Returns:
        DataFrame with columns t, re_value, im_value, e_plus_re, e_plus_im, abs_err
    """
    if obs.a_probe:
        raise ValueError("trajectory observables take no A_1..A_p factors")
    _check_observable(model, obs)
    if steps + obs.r > n_elements:
        raise CapacityError(f"{steps} intervals with {obs.r} future factors need more than {n_elements} elements")
    offsets = [model.tau * i / points_per_interval for i in range(points_per_interval)]
    predictions = [rias_expectation(model, data, obs, s, tol) for s in offsets]
    state = init_chain(model, n_elements, rho_s_init, tol)
    rows = []
    for m in range(obs.ell, steps):
        for s, e_plus in zip(offsets, predictions):
            t = m * model.tau + s
            state = evolve_to(state, t, tol)
            value = expect(state, obs)
            rows.append({
                't': t,
                're_value': value.real,
                'im_value': value.imag,
                'e_plus_re': e_plus.real,
                'e_plus_im': e_plus.imag,
                'abs_err': abs(value - e_plus),
            })
    frame = pd.DataFrame(rows, columns=['t', 're_value', 'im_value', 'e_plus_re', 'e_plus_im', 'abs_err'])
    if model.verbose and not frame.empty:
        logger.info(f"Simulated {len(frame)} points on {n_elements} elements; final error {frame['abs_err'].iloc[-1]:.3e}")
    return frame
