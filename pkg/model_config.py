"""
JSON model configurations.

Schema (complex entries as [re, im] pairs, plain numbers read as real):

    {
      "model_kind": "spin-spin" | "custom-finite" | "sf-quadratic" | "sf-linear",
      "tau": 1.0, "lambda": 0.6, "beta_S": 0.0, "beta_E": 1.0,
      "spin_spin": {"E_S": 1.0, "E_E": 1.5, "I": [[a, b], [c, d]]},
      "custom": {"h_S": [[...]], "h_E": [[...]], "v_terms": [[A, B], ...]},
      "sf": {"form_factor": {"family": "exponential", "params": {"c": 1.0, "k": 0.5}}},
      "initial_state": [[...]],
      "verbose": false
    }
"""

from dataclasses import dataclass, field
import json
import logging

import numpy as np

from gns import RepeatedInteractionModel, spin_spin_model
from numerics import is_hermitian, matrix_from_pairs
from reduced import InstantObservable
from sforacle import make_form_factor
from tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)

MODEL_KINDS = ('spin-spin', 'custom-finite', 'sf-quadratic', 'sf-linear')
FINITE_KINDS = ('spin-spin', 'custom-finite')
DEFAULT_COUPLING = [[0.0, 1.0], [1.0, 0.0]]


def _real(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{name} must be a real number")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite")
    return value


def _required(block, key, where):
    value = block.get(key, None)
    if value is None:
        raise ValueError(f"{key} is required" + (f" in {where}" if where else ""))
    return value


def _object(value, name):
    if not isinstance(value, dict):
        raise ValueError(f"{name} must be a JSON object")
    return value


def _hermitian(data, name, tol):
    m = matrix_from_pairs(data, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square")
    if not is_hermitian(m, tol.input_hermitian):
        raise ValueError(f"{name} must be Hermitian")
    return m


@dataclass
class ModelConfig:
    model_kind: str
    tau: float
    lam: float
    beta_s: float = 0.0
    beta_e: float = 1.0
    e_s: float | None = None
    e_e: float | None = None
    coupling: np.ndarray | None = None
    h_s: np.ndarray | None = None
    h_e: np.ndarray | None = None
    v_terms: list = field(default_factory=list)
    family: str = 'exponential'
    ff_params: dict = field(default_factory=dict)
    initial_state: np.ndarray | None = None
    verbose: bool = False

    @classmethod
    def from_dict(cls, data, tol=DEFAULT_TOLERANCES):
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        kind = _required(data, 'model_kind', '')
        if kind not in MODEL_KINDS:
            raise ValueError(f"model_kind must be one of {', '.join(MODEL_KINDS)}, got {kind!r}")
        tau = _real(_required(data, 'tau', ''), 'tau')
        if tau <= 0:
            raise ValueError("tau must be positive")
        config = cls(
            model_kind=kind,
            tau=tau,
            lam=_real(_required(data, 'lambda', ''), 'lambda'),
            beta_s=_real(data.get('beta_S', 0.0), 'beta_S'),
            beta_e=_real(data.get('beta_E', 1.0), 'beta_E'),
            verbose=bool(data.get('verbose', False)),
        )
        if config.beta_s < 0 or config.beta_e < 0:
            raise ValueError("inverse temperatures must be >= 0")

        if kind == 'spin-spin':
            block = _object(_required(data, 'spin_spin', ''), 'spin_spin')
            config.e_s = _real(_required(block, 'E_S', 'spin_spin'), 'E_S')
            config.e_e = _real(_required(block, 'E_E', 'spin_spin'), 'E_E')
            config.coupling = matrix_from_pairs(block.get('I', DEFAULT_COUPLING), 'I')
            if config.coupling.shape != (2, 2):
                raise ValueError("I must be a 2x2 matrix")
        elif kind == 'custom-finite':
            block = _object(_required(data, 'custom', ''), 'custom')
            config.h_s = _hermitian(_required(block, 'h_S', 'custom'), 'h_S', tol)
            config.h_e = _hermitian(_required(block, 'h_E', 'custom'), 'h_E', tol)
            terms = _required(block, 'v_terms', 'custom')
            if not isinstance(terms, list) or not terms:
                raise ValueError("v_terms must be a non-empty list of [A, B] pairs")
            for i, term in enumerate(terms):
                if not isinstance(term, list) or len(term) != 2:
                    raise ValueError(f"v_terms[{i}] must be an [A, B] pair")
                config.v_terms.append((matrix_from_pairs(term[0], f'v_terms[{i}].A'),
                                       matrix_from_pairs(term[1], f'v_terms[{i}].B')))
        else:
            sf_block = _object(data.get('sf', {}), 'sf')
            block = _object(sf_block.get('form_factor', {}), 'sf.form_factor')
            config.family = block.get('family', 'exponential')
            params = _object(block.get('params', {}), 'sf.form_factor.params')
            config.ff_params = {k: _real(v, k) for k, v in params.items()}

        if data.get('initial_state') is not None:
            config.initial_state = matrix_from_pairs(data['initial_state'], 'initial_state')
        return config

    @classmethod
    def load(cls, path, tol=DEFAULT_TOLERANCES):
        with open(path) as fh:
            data = json.load(fh)
        config = cls.from_dict(data, tol)
        logger.debug(f"Loaded {config.model_kind} config from {path}")
        return config

    @property
    def is_finite(self):
        return self.model_kind in FINITE_KINDS

    def build_model(self, tol=DEFAULT_TOLERANCES):
        """RepeatedInteractionModel for spin-spin and custom-finite configs."""
        if self.model_kind == 'spin-spin':
            return spin_spin_model(self.e_s, self.e_e, self.beta_e, self.tau, self.lam,
                                   coupling=self.coupling, beta_s=self.beta_s,
                                   verbose=self.verbose, tol=tol)
        if self.model_kind == 'custom-finite':
            return RepeatedInteractionModel(self.h_s, self.h_e, self.v_terms, self.lam, self.tau,
                                            beta_s=self.beta_s, beta_e=self.beta_e,
                                            verbose=self.verbose, tol=tol)
        raise ValueError(f"model_kind {self.model_kind} has no finite-dimensional model")

    def form_factor(self, tol=DEFAULT_TOLERANCES):
        """FormFactor for sf-quadratic and sf-linear configs, at inverse temperature beta_E."""
        if self.is_finite:
            raise ValueError(f"model_kind {self.model_kind} has no form factor")
        return make_form_factor(self.family, beta=self.beta_e, tol=tol, **self.ff_params)

    def initial_density(self, d_s):
        if self.initial_state is None:
            return np.eye(d_s, dtype=complex) / d_s
        return self.initial_state


def load_observable(path, d_s, d_e):
    """
    InstantObservable from JSON:
    {"A_S": M, "B_past": [M, ...], "B_0": M, "B_future": [M, ...], "A_probe": [M, ...]}.
    Missing A_S and B_0 default to identities.
    """
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("observable must be a JSON object")

    def matrices(key):
        items = data.get(key, [])
        if not isinstance(items, list):
            raise ValueError(f"{key} must be a list of matrices")
        return [matrix_from_pairs(m, key) for m in items]

    a_s = matrix_from_pairs(data['A_S'], 'A_S') if 'A_S' in data else np.eye(d_s)
    b_zero = matrix_from_pairs(data['B_0'], 'B_0') if 'B_0' in data else np.eye(d_e)
    obs = InstantObservable(a_s=a_s, b_past=matrices('B_past'), b_zero=b_zero,
                            b_future=matrices('B_future'), a_probe=matrices('A_probe'))
    if obs.a_s.shape != (d_s, d_s) or obs.b_zero.shape != (d_e, d_e):
        raise ValueError("observable dimensions do not match the model")
    return obs
