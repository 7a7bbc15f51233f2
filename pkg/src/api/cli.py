"""
Command-line entry point.

    chiralsim isolated [--delta-local D] [--t-max T]
    chiralsim run --config scenario.cfg
    chiralsim figure fig2a
    chiralsim sweep --config base.cfg --parameter j0 --values 1e-4 1e-3 1e-2
    chiralsim oracle-compare --config weak.cfg --modes 200
    chiralsim spectral dump --config scenario.cfg

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 oracle threshold failure, 5 truncation invalid.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

import numpy as np

from src.core.errors import (ConfigError, OracleError, ParameterError, QuadratureError,
                             TruncationInvalidError)
from src.core.model import MoleculeParams, REFERENCE_HBAR, REFERENCE_TUNNELING
from .config import SWEEP_KEYS, ScenarioConfig, load_config, parse_sweep
from .simulation_api import FIGURES, SimulationContext

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_THRESHOLD = 4
EXIT_TRUNCATION = 5


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario document with section.key = value lines")
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--tol", type=float, help="relative quadrature tolerance, overrides run.tolerance")
    common.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="warnings and errors only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="chiralsim", description="Chiral molecule in a harmonic bath")
    verbs = parser.add_subparsers(dest="command", required=True)

    isolated = verbs.add_parser("isolated", parents=[common], help="closed two-level tunneling")
    isolated.add_argument("--delta-tunnel", type=float, default=REFERENCE_TUNNELING)
    isolated.add_argument("--delta-local", type=float, default=0.0)
    isolated.add_argument("--hbar", type=float, default=REFERENCE_HBAR)
    isolated.add_argument("--t-max", type=float, default=1e4)
    isolated.add_argument("--points", type=int, default=1000)

    verbs.add_parser("run", parents=[common], help="evaluate one scenario")

    figure = verbs.add_parser("figure", parents=[common], help="reproduce the curves of one figure")
    figure.add_argument("figure_id", choices=sorted(FIGURES))

    sweep = verbs.add_parser("sweep", parents=[common], help="sweep one parameter of a scenario")
    sweep.add_argument("--parameter", required=True, choices=sorted(SWEEP_KEYS))
    values = sweep.add_mutually_exclusive_group(required=True)
    values.add_argument("--values", nargs="+", type=float, help="explicit value list")
    values.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "NUM"),
                        help="evenly spaced values")
    sweep.add_argument("--log", action="store_true", help="geometric spacing for --range")

    oracle = verbs.add_parser("oracle-compare", parents=[common], help="check against the discrete bath")
    oracle.add_argument("--modes", type=int, help="number of bath modes (default oracle.modes)")
    oracle.add_argument("--omega-max", type=float, help="highest mode frequency")

    spectral = verbs.add_parser("spectral", parents=[common], help="spectral density utilities")
    spectral.add_argument("action", choices=["dump"])
    spectral.add_argument("--points", type=int, default=1001)
    spectral.add_argument("--omega-max", type=float)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(format="[%(module)-12s] %(message)s", level=level, force=True)


def _require_config(args) -> ScenarioConfig:
    if not args.config:
        raise ConfigError([f"'{args.command}' needs --config"])
    config = load_config(args.config)
    if args.tol is not None:
        config = config.with_values(**{'run.tolerance': args.tol})
    return config


def _sweep_values(args) -> List[float]:
    if args.values is not None:
        return list(args.values)
    start, stop, num = args.range
    if num < 1 or not float(num).is_integer():
        raise ConfigError(["--range NUM must be a positive integer"])
    spacing = np.geomspace if args.log else np.linspace
    return list(spacing(start, stop, int(num)))


def dispatch(args) -> int:
    with SimulationContext(args.out, max(1, args.threads)) as api:
        if args.command == "isolated":
            if args.config:
                config = _require_config(args)
                molecule, t_grid = config.molecule, config.times.values()
            else:
                molecule = MoleculeParams(args.delta_tunnel, args.delta_local, args.hbar)
                t_grid = np.linspace(0.0, args.t_max, args.points)
            print(api.isolated(molecule, t_grid))
        elif args.command == "run":
            print(api.run(_require_config(args)))
        elif args.command == "figure":
            for path in api.figure(args.figure_id):
                print(path)
        elif args.command == "sweep":
            if not args.config:
                raise ConfigError(["'sweep' needs --config"])
            with open(args.config, 'r', encoding='utf-8') as handle:
                text = handle.read()
            spec = parse_sweep(text, args.parameter, _sweep_values(args),
                               os.path.dirname(os.path.abspath(args.config)))
            print(api.sweep(spec))
        elif args.command == "oracle-compare":
            comparison, path = api.oracle_compare(_require_config(args), args.modes, args.omega_max)
            print(path)
            print(f"max deviation {comparison.max_deviation:.3e} "
                  f"({'pass' if comparison.passed else 'fail'} at {comparison.threshold:g})")
            if not comparison.passed:
                return EXIT_THRESHOLD
        elif args.command == "spectral":
            config = _require_config(args)
            print(api.spectral_dump(config.bath, args.points, args.omega_max))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return dispatch(args)
    except ConfigError as exc:
        for violation in exc.violations:
            logger.error("config: %s", violation)
        return EXIT_CONFIG
    except ParameterError as exc:
        logger.error("invalid parameter: %s", exc)
        return EXIT_CONFIG
    except TruncationInvalidError as exc:
        logger.error("truncation invalid: %s", exc)
        return EXIT_TRUNCATION
    except (QuadratureError, OracleError) as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
