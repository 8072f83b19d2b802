"""
Command-line front end.

    python cli.py spectrum configs/spin_spin_lambda_0.6.json
    python cli.py simulate configs/spin_spin_lambda_0.6.json --chain 10 --steps 9 --out trajectory.csv
    python cli.py thermo configs/spin_spin_lambda_0.6.json
    python cli.py oracle configs/sf_quadratic.json --seed 7
    python cli.py verify configs/spin_spin_lambda_0.05.json

JSON goes to stdout, logs to stderr. Exit codes: 0 success, 1 input or
capacity error, 2 reduced dynamics not ergodic, 3 precondition refused.
"""

import argparse
import json
import logging
import math
import sys

import numpy as np

import chainsim
import reduced
import sforacle
import thermo
import verify
from errors import CapacityError, NotErgodic, NumericalFailure, PreconditionError
from model_config import ModelConfig, load_observable
from reduced import InstantObservable
from tolerances import DEFAULT_TOLERANCES, load_tolerances

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
logger.addHandler(_handler)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_ERGODIC = 2
EXIT_PRECONDITION = 3


def _plain(value):
    """Convert numpy values to JSON types; non-finite floats become None."""
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def emit(payload, stream=None):
    """Write ``payload`` as sorted-key standard JSON (inf and nan as null)."""
    stream = sys.stdout if stream is None else stream
    stream.write(json.dumps(_plain(payload), sort_keys=True, allow_nan=False) + '\n')


def _finite_model(config, tol, command):
    if not config.is_finite:
        raise ValueError(f"{command} needs a finite model kind, got {config.model_kind}")
    return config.build_model(tol)


def cmd_spectrum(config, args, tol):
    model = _finite_model(config, tol, 'spectrum')
    data = reduced.analyze_model(model, tol, strict=False)
    payload = data.to_dict()
    payload.update({'model_kind': config.model_kind, 'tau': config.tau, 'lambda': config.lam})
    emit(payload)
    if not data.ergodic:
        logger.error(f"reduced dynamics is not ergodic ({data.reason})")
        return EXIT_NOT_ERGODIC
    return EXIT_OK


def cmd_simulate(config, args, tol):
    model = _finite_model(config, tol, 'simulate')
    if args.chain is None:
        raise ValueError("--chain is required for simulate")
    if args.observable:
        obs = load_observable(args.observable, model.d_s, model.d_e)
    else:
        obs = InstantObservable.identity(model.d_s, model.d_e)
    steps = args.chain - obs.r if args.steps is None else args.steps
    if steps > args.chain:
        raise CapacityError(f"{steps} steps need at least {steps} chain elements, got {args.chain}")
    data = reduced.analyze_model(model, tol)
    frame = chainsim.simulate_trajectory(model, data, args.chain, config.initial_density(model.d_s), obs,
                                         steps, tol=tol)
    if args.out:
        frame.to_csv(args.out, index=False)
        logger.info(f"Wrote {len(frame)} rows to {args.out}")
    else:
        frame.to_csv(sys.stdout, index=False)
    return EXIT_OK


def cmd_thermo(config, args, tol):
    model = _finite_model(config, tol, 'thermo')
    report = thermo.thermo_report(model, tol=tol, strict=args.strict)
    emit(report.to_dict())
    return EXIT_OK


def cmd_oracle(config, args, tol):
    if config.model_kind == 'custom-finite':
        raise PreconditionError("no closed-form expansion exists for custom-finite models")
    if config.model_kind == 'spin-spin':
        result = sforacle.spinspin_oracle(config.e_s, config.e_e, config.beta_e, config.tau, config.lam,
                                          config.coupling, tol)
    elif config.model_kind == 'sf-quadratic':
        ff = config.form_factor(tol)
        result = sforacle.sf_quadratic_all(ff, config.tau, config.lam, tol)
        if args.seed is not None:
            mc = sforacle.mc_quadratic_alphas(ff, config.tau, seed=args.seed)
            result.extras.update({'mc_alpha1': mc[0], 'mc_alpha2': mc[1], 'mc_seed': args.seed})
    else:
        result = sforacle.sf_linear_all(config.form_factor(tol), config.tau, config.lam, tol)
    emit(result.to_dict())
    return EXIT_OK


def cmd_verify(config, args, tol):
    frame = verify.run_checks(config, tol, seed=args.seed)
    passed = bool(frame['passed'].all())
    emit({'checks': frame.to_dict(orient='records'), 'passed': passed})
    return EXIT_OK if passed else EXIT_INPUT


COMMANDS = {
    'spectrum': cmd_spectrum,
    'simulate': cmd_simulate,
    'thermo': cmd_thermo,
    'oracle': cmd_oracle,
    'verify': cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(description="Repeated interaction systems: reduced dynamics, "
                                                 "asymptotic state, thermodynamics and oracles.")
    parser.add_argument('--tol-overrides', default=None, help="JSON file of tolerance overrides")
    sub = parser.add_subparsers(dest='command', required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument('config', help="model configuration (JSON)")
        p.add_argument('--seed', type=int, default=None, help="seed for Monte-Carlo cross-checks")
        if name == 'simulate':
            p.add_argument('--chain', type=int, default=None, help="number N of simulated chain elements")
            p.add_argument('--steps', type=int, default=None, help="number of interaction intervals to sample")
            p.add_argument('--observable', default=None, help="instantaneous observable (JSON)")
            p.add_argument('--out', default=None, help="CSV output path (default: stdout)")
        if name == 'thermo':
            p.add_argument('--strict', action='store_true',
                           help="refuse (exit 3) when the flux quadrature or the two flux forms disagree")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        tol = load_tolerances(args.tol_overrides) if args.tol_overrides else DEFAULT_TOLERANCES
        config = ModelConfig.load(args.config, tol)
        return COMMANDS[args.command](config, args, tol)
    except NotErgodic as exc:
        logger.error(f"Not ergodic: {exc}")
        return EXIT_NOT_ERGODIC
    except PreconditionError as exc:
        logger.error(f"Refused: {exc}")
        return EXIT_PRECONDITION
    except NumericalFailure as exc:
        logger.error(f"Numerical failure: {exc}")
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        logger.error(f"Could not parse JSON: {exc}")
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
