"""
eigencomplete command line

    eigencomplete run <config>
    eigencomplete reproduce <name> [--out DIR]
    eigencomplete identity --sigma S
"""
import argparse
import os
import sys
from typing import List, Optional

from components.plot_component import write_figure
from components.progress_component import create_error_list, create_run_summary
from utils.completeness import NumericsOptions, identity_check
from utils.exceptions import EigencompleteError
from utils.file_handler import IDENTITY_TOLERANCE, create_experiment_runner, format_identity
from utils.logging_config import get_logger, set_verbosity
from utils.presets import PRESETS

logger = get_logger(__name__)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads', type=int, default=argparse.SUPPRESS,
                        help="worker threads for the spectral integrals (default: all cores)")
    common.add_argument('--tol', type=float, default=argparse.SUPPRESS,
                        help="absolute and relative quadrature tolerance")
    common.add_argument('--edge-margin', type=float, default=argparse.SUPPRESS,
                        help="refuse Bloch states this close to a band edge")
    common.add_argument('-v', '--verbose', action='count', default=argparse.SUPPRESS,
                        help="-v for progress, -vv for numerical detail")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog='eigencomplete',
        description="Eigenstate families of 1D potentials and numerical completeness checks",
        parents=[common],
    )
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', parents=[common], help="run one experiment config")
    run.add_argument('config', help="path to a .ini experiment config")

    reproduce = commands.add_parser('reproduce', parents=[common], help="run a reproduction preset")
    reproduce.add_argument('name', choices=sorted(PRESETS))
    reproduce.add_argument('--out', default=None, help="output directory (default: results/<name>)")

    identity = commands.add_parser('identity', parents=[common],
                                   help="check the well-mode plane-wave probability identity")
    identity.add_argument('--sigma', type=float, required=True)
    return parser


def _overrides(args) -> dict:
    # shared flags may sit before or after the subcommand, so they default to SUPPRESS
    overrides = {'threads': getattr(args, 'threads', None), 'edge_margin': getattr(args, 'edge_margin', None)}
    tol = getattr(args, 'tol', None)
    if tol is not None:
        overrides['abs_tol'] = tol
        overrides['rel_tol'] = tol
    return overrides


def run_identity(args) -> int:
    try:
        options = NumericsOptions.from_dict({k: v for k, v in _overrides(args).items() if v is not None})
        value = identity_check(args.sigma, options)
    except EigencompleteError as e:
        print(create_error_list([f"identity: {e}"]), file=sys.stderr)
        return e.exit_code
    print(format_identity(value))
    return 0 if abs(value - 1.0) < IDENTITY_TOLERANCE else 3


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    verbose = getattr(args, 'verbose', 0)
    set_verbosity(verbose)

    if args.command == 'identity':
        return run_identity(args)

    runner = create_experiment_runner(
        output_dir=getattr(args, 'out', None),
        numerics_overrides=_overrides(args),
        figure_writer=write_figure,
        numerics_defaults={'threads': os.cpu_count() or 1},
    )
    if args.command == 'run':
        results = runner.run_file(args.config)
    else:
        results = runner.run_preset(args.name)

    summary = create_run_summary(results, verbose=verbose > 0)
    print(summary, file=sys.stdout if results['exit_code'] == 0 else sys.stderr)
    logger.info(f"{args.command} finished with exit code {results['exit_code']}")
    return results['exit_code']


if __name__ == "__main__":
    sys.exit(main())
