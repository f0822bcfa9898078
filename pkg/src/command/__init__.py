from __future__ import annotations
from typing import Optional, Sequence

import argparse

from .. import env, log
from . import utils, degree, topology, check, fixtures, minimize, selftest
from .utils import RunManifest, EXIT_OK, EXIT_FAILS, EXIT_INPUT

logger = log.getLogger('plinv.command')

SUBCOMMAND_MODULES = (degree, topology, check, fixtures, minimize, selftest)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='seed of every sampled check')
    common.add_argument('--resolution', type=int, help='background grid resolution (cells along the diagonal)')
    common.add_argument('--out', help='report path (fixtures: output directory)')
    common.add_argument('--manifest', help='run manifest path (default: <out>.manifest.json)')

    parser = argparse.ArgumentParser(
        prog='plinv',
        description='Degree and invertibility conditions of piecewise affine maps.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {env.VERSION}')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True
    for module in SUBCOMMAND_MODULES:
        module.add_parsers(subparsers, common)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv`` and run one subcommand.

    :return: 0 on success, 1 when ``--strict`` is given and a verdict fails, 2 on input errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors and 0 for --help/--version
        return int(e.code or 0)
    logger.debug(f'Running {args.command} with seed {args.seed}')
    return args.handler(args)
