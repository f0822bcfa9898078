from __future__ import annotations
from typing_extensions import Final

import argparse

from .. import log
from ..aio_helper import gather_in_pool
from ..conditions import (
    check_CNC, check_DEG1, check_DEG1_loc, check_INV, check_AIB, check_AIB_loc, check_AI, check_injective_ae,
    run_checks, ledger_entry,
)
from ..conditions.measure import CNC_SAMPLES
from ..errors_collection import MalformedInput
from ..mesh.covering import inner_covering
from ..topology import check_strictly_orientation_preserving
from .utils import command_gatekeeper, RunManifest, load_map, emit_report, parse_names, add_map_flags

logger = log.getLogger('plinv.command')

CONDITION_NAMES: Final = ('cnc', 'deg1', 'deg1loc', 'inv', 'aib', 'aibloc', 'ai', 'injective', 'strict')
NEEDS_COVERING: Final = ('deg1loc', 'aibloc')
DEFAULT_CONDITIONS: Final = 'cnc,deg1,deg1loc,inv,aib'


def _normalize(name: str) -> str:
    return name.lower().replace('_', '').replace('-', '')


def _call(name: str, pmap, covering, args: argparse.Namespace):
    if name == 'cnc':
        return check_CNC, (pmap, args.samples, args.seed), {}
    if name == 'deg1':
        return check_DEG1, (pmap, None, args.resolution), {}
    if name == 'deg1loc':
        return check_DEG1_loc, (pmap, covering, args.resolution), {}
    if name == 'inv':
        return check_INV, (pmap,), {'seed': args.seed}
    if name == 'aib':
        return (lambda: check_AIB(pmap)[0]), (), {}
    if name == 'aibloc':
        return check_AIB_loc, (pmap, covering), {}
    if name == 'ai':
        return check_AI, (pmap, args.resolution), {}
    if name == 'injective':
        return check_injective_ae, (pmap, args.samples, args.seed), {}
    return check_strictly_orientation_preserving, (pmap, args.seed), {}


@command_gatekeeper(strict_capable=True)
def cmd_check(args: argparse.Namespace, manifest: RunManifest):
    pmap = load_map(args, manifest)
    if args.ledger:
        verdicts = run_checks(pmap, args.seed, args.levels, args.samples, args.resolution)
        entry = ledger_entry('input', pmap, verdicts, args.resolution)
        emit_report(args, manifest, entry)
        return list(verdicts.values())

    names = [_normalize(name) for name in parse_names(args.conditions)]
    unknown = sorted(set(names) - set(CONDITION_NAMES))
    if unknown or not names:
        raise MalformedInput('conditions', f'unknown {unknown}, expected some of {", ".join(CONDITION_NAMES)}')
    names = sorted(set(names), key=names.index)
    covering = None
    if any(name in NEEDS_COVERING for name in names):
        covering = inner_covering(pmap.mesh, args.levels, check_complement=False, resolution=args.resolution)
    verdicts = gather_in_pool(_call(name, pmap, covering, args) for name in names)
    for verdict in verdicts:
        logger.info(f'{verdict.condition}: {verdict.verdict}')
    emit_report(args, manifest, {
        'verdicts': {v.condition: v for v in verdicts},
        'seed': args.seed,
        'covering': covering.to_dict() if covering is not None else None,
    })
    return verdicts


def add_parsers(subparsers, common: argparse.ArgumentParser):
    check = subparsers.add_parser('check', parents=[common], help='invertibility conditions of the map')
    add_map_flags(check, submesh=False)
    check.add_argument('--conditions', default=DEFAULT_CONDITIONS,
                       help=f'comma separated list out of {", ".join(CONDITION_NAMES)}')
    check.add_argument('--samples', type=int, default=CNC_SAMPLES, help='Monte-Carlo sample count (3D CNC)')
    check.add_argument('--levels', type=int, default=3, help='inner covering levels for the localized conditions')
    check.add_argument('--ledger', action='store_true',
                       help='run every checker and compare the verdicts along the implication ledger')
    check.add_argument('--strict', action='store_true', help='exit with status 1 if a condition fails')
    check.set_defaults(handler=cmd_check)
