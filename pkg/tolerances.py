"""
Numeric thresholds shared by every module.

Each public operation takes ``tol=DEFAULT_TOLERANCES``; a JSON file of
overrides can be applied with ``load_tolerances``.
"""

import dataclasses
from dataclasses import dataclass
import json
import logging

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)


@dataclass(frozen=True)
class Tolerances:
    # numerics
    hermitian: float = 1e-12
    input_hermitian: float = 1e-10
    eig_residual: float = 1e-8
    eig_condition: float = 1e6
    psd_negative: float = 1e-10
    log_floor: float = 1e-300
    trace: float = 1e-10
    # gns
    omega_norm: float = 1e-12
    liouvillean_kernel: float = 1e-10
    k_kernel: float = 1e-9
    commutant: float = 1e-9
    # reduced
    fixed_point: float = 1e-10
    circle: float = 1e-8
    simple_one: float = 1e-8
    unit_one: float = 1e-10
    factorization: float = 1e-8
    max_vector_dim: int = 2**20
    max_two_element_dim: int = 2**16
    reconstruction_floor: float = 1e-12
    # chainsim
    max_chain_dim: int = 2**14
    positivity: float = 1e-8
    clock: float = 1e-12
    unitarity: float = 1e-9
    # thermo
    simpson_nodes: int = 401
    richardson: float = 1e-9
    form_residual: float = 1e-7
    imaginary: float = 1e-9
    flux_positive: float = 1e-8
    # sforacle
    resonance: float = 1e-6
    lambda_validity: float = 0.2
    series_cutoff: float = 1e-3
    quadrature_doubling: float = 1e-7
    sf1_tail: float = 1e-10
    method_agreement: float = 1e-5


DEFAULT_TOLERANCES = Tolerances()


def load_tolerances(path, base=DEFAULT_TOLERANCES):
    """
    Apply a JSON object of overrides on top of ``base``.

    Args:
        path: JSON file with a flat object, e.g. {"circle": 1e-7}
        base: Tolerances to start from

    Returns:
        New Tolerances instance
    """
    with open(path) as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise ValueError("tolerance overrides must be a JSON object")
    known = {f.name for f in dataclasses.fields(Tolerances)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ValueError(f"unknown tolerance keys: {', '.join(unknown)}")
    cast = {
        key: int(value) if isinstance(getattr(base, key), int) else float(value)
        for key, value in overrides.items()
    }
    logger.debug(f"Tolerance overrides from {path}: {cast}")
    return dataclasses.replace(base, **cast)
