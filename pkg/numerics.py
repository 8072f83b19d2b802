"""
Dense complex linear algebra at small fixed dimensions.

Matrices are plain ``numpy`` complex arrays. Multi-factor states (vectors or
matrices whose row index runs over a tensor product) are described by a list
of per-factor dimensions and are never expanded into full-space operators by
``apply_local``.
"""

import logging
import math
import string

import numpy as np
import scipy.linalg

from errors import Defective
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)


def as_matrix(a, name='matrix'):
    """Convert to a finite 2D complex array, rejecting NaN/Inf."""
    m = np.array(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_square(a, name='matrix'):
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def factor_shape(dims):
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"factor dimensions must all be >= 1, got {dims}")
    return dims


def opnorm(a):
    """Spectral norm (largest singular value)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def is_hermitian(a, tol=DEFAULT_TOLERANCES.hermitian):
    a = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return float(np.max(np.abs(a - a.conj().T), initial=0.0)) <= tol * scale


def kron(a, b):
    return np.kron(as_matrix(a, 'a'), as_matrix(b, 'b'))


def kron_all(factors):
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def expm(a, tol=DEFAULT_TOLERANCES):
    """
    Matrix exponential.

    Hermitian inputs go through ``eigh``, other normal inputs through the
    complex Schur form (diagonal for normal matrices), everything else through
    scipy's scaling-and-squaring.
    """
    a = as_square(a, 'expm input')
    n = a.shape[0]
    if n == 0:
        return a.copy()
    scale = max(1.0, float(np.max(np.abs(a))))
    if is_hermitian(a, tol.hermitian):
        vals, vecs = np.linalg.eigh((a + a.conj().T) / 2)
        return (vecs * np.exp(vals)) @ vecs.conj().T
    commutator = a @ a.conj().T - a.conj().T @ a
    if float(np.max(np.abs(commutator))) <= tol.hermitian * scale**2:
        t, z = scipy.linalg.schur(a, output='complex')
        return (z * np.exp(np.diag(t))) @ z.conj().T
    return scipy.linalg.expm(a)


def evolution(h, t):
    """exp(-i t h) for Hermitian h."""
    h = as_square(h, 'generator')
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    return (vecs * np.exp(-1j * t * vals)) @ vecs.conj().T


def eigenvalues(a):
    """Eigenvalues from the complex Schur form; valid for defective inputs too."""
    a = as_square(a, 'eigenvalues input')
    t, _ = scipy.linalg.schur(a, output='complex')
    return np.diag(t).copy()


def _clusters(values, radius):
    order = np.argsort(values.real, kind='stable')
    groups = []
    for idx in order:
        for group in groups:
            if abs(values[group[0]] - values[idx]) <= radius:
                group.append(idx)
                break
        else:
            groups.append([idx])
    return groups


def eig(a, tol=DEFAULT_TOLERANCES):
    """
    General eigendecomposition with biorthonormal left/right vectors.

    Args:
        a: square complex matrix
        tol: Tolerances (eig_residual, eig_condition)

    Returns:
        (eigenvalues, right_vectors, left_vectors) with a @ R = R @ diag(w),
        L^H @ a = diag(w) @ L^H and L^H @ R = I

    Raises:
        Defective: when a Jordan block makes the eigenvectors untrustworthy
    """
    a = as_square(a, 'eig input')
    n = a.shape[0]
    norm = max(opnorm(a), np.finfo(float).tiny)
    w, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl / np.linalg.norm(vl, axis=0)

    for group in _clusters(w, tol.eig_residual * max(1.0, norm)):
        gram = vl[:, group].conj().T @ vr[:, group]
        singular = np.linalg.svd(gram, compute_uv=False)
        condition = float('inf') if singular[-1] == 0 else 1.0 / singular[-1]
        if condition > tol.eig_condition:
            raise Defective(
                f"eigenvalue {w[group[0]]:.6g} has condition {condition:.3g} (Jordan block suspected)",
                condition=condition,
            )
        vl[:, group] = vl[:, group] @ np.linalg.inv(gram).conj().T

    residual = np.linalg.norm(a @ vr - vr * w, axis=0)
    worst = float(np.max(residual, initial=0.0))
    if worst > tol.eig_residual * norm:
        raise Defective(f"eigenvector residual {worst:.3g} exceeds tolerance")
    left_residual = np.linalg.norm(a.conj().T @ vl - vl * w.conj(), axis=0) / np.linalg.norm(vl, axis=0)
    if float(np.max(left_residual, initial=0.0)) > tol.eig_residual * norm:
        raise Defective("left eigenvector residual exceeds tolerance")
    logger.debug(f"eig: n={n}, worst residual {worst:.2e}")
    return w, vr, vl


def apply_local(op, state, shape, targets):
    """
    Apply ``op`` on the ``targets`` factors of a multi-factor vector or matrix.

    For a matrix state the operator acts on the row index (left
    multiplication); the columns are carried along as a batch.
    """
    dims = factor_shape(shape)
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets) or any(t < 0 or t >= len(dims) for t in targets):
        raise ValueError(f"invalid targets {targets} for {len(dims)} factors")
    local = math.prod(dims[t] for t in targets)
    op = as_matrix(op, 'local operator')
    if op.shape != (local, local):
        raise ValueError(f"operator shape {op.shape} does not match target dimension {local}")
    total = math.prod(dims)
    state = np.asarray(state, dtype=complex)
    if state.shape[0] != total or state.ndim not in (1, 2):
        raise ValueError(f"state of shape {state.shape} does not match factor dims {dims}")

    tensor = state.reshape(*dims, -1)
    k = len(targets)
    op_tensor = op.reshape([dims[t] for t in targets] * 2)
    out = np.tensordot(op_tensor, tensor, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    return out.reshape(state.shape)


def conjugate_local(u, rho, shape, targets):
    """u rho u^dagger with u acting on ``targets``."""
    left = apply_local(u, rho, shape, targets)
    return apply_local(u, left.conj().T, shape, targets).conj().T


def embed(op, shape, targets):
    """Dense full-space operator of a local op; small spaces only."""
    total = math.prod(factor_shape(shape))
    return apply_local(op, np.eye(total, dtype=complex), shape, targets)


def partial_trace(rho, shape, keep, tol=DEFAULT_TOLERANCES):
    """Trace out every factor not listed in ``keep`` (output in ``keep`` order)."""
    dims = factor_shape(shape)
    rho = as_square(rho, 'rho')
    total = math.prod(dims)
    if rho.shape[0] != total:
        raise ValueError(f"rho dimension {rho.shape[0]} does not match factor dims {dims}")
    if not is_hermitian(rho, tol.input_hermitian):
        raise ValueError("rho must be Hermitian")
    keep = [int(k) for k in keep]
    if len(set(keep)) != len(keep) or any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"invalid keep indices {keep}")

    n = len(dims)
    letters = string.ascii_letters
    if 2 * n > len(letters):
        raise ValueError("too many factors for partial_trace")
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            cols[i] = rows[i]
    subscripts = ''.join(rows) + ''.join(cols) + '->' + ''.join(rows[k] for k in keep) + ''.join(cols[k] for k in keep)
    kept = math.prod(dims[k] for k in keep)
    out = np.einsum(subscripts, rho.reshape(dims + dims)).reshape(kept, kept)
    return (out + out.conj().T) / 2


def logm_psd(rho, floor=DEFAULT_TOLERANCES.log_floor, tol=DEFAULT_TOLERANCES):
    """Spectral logarithm of a positive semidefinite matrix, eigenvalues clamped at ``floor``."""
    rho = as_square(rho, 'rho')
    if not is_hermitian(rho, tol.input_hermitian):
        raise ValueError("logm_psd needs a Hermitian matrix")
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    if vals.size and vals[0] < -tol.psd_negative:
        raise ValueError(f"negative eigenvalue {vals[0]:.3g} in logm_psd")
    logs = np.log(np.maximum(vals, floor))
    return (vecs * logs) @ vecs.conj().T


def complex_pair(z):
    """[re, im] encoding used in every JSON artifact."""
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_pairs(m):
    return [[complex_pair(z) for z in row] for row in np.asarray(m)]


def matrix_from_pairs(data, name='matrix'):
    """Decode nested lists whose entries are [re, im] pairs or plain reals."""
    if not isinstance(data, list) or not data or not all(isinstance(row, list) for row in data):
        raise ValueError(f"{name} must be a non-empty list of rows")

    def entry(value):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return complex(value, 0.0)
        if (isinstance(value, list) and len(value) == 2
                and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
            return complex(value[0], value[1])
        raise ValueError(f"{name} entries must be numbers or [re, im] pairs, got {value!r}")

    rows = [[entry(value) for value in row] for row in data]
    if len({len(row) for row in rows}) != 1:
        raise ValueError(f"{name} rows have different lengths")
    return as_matrix(rows, name)
