from __future__ import annotations
from typing_extensions import Final

import argparse
import os

from .. import log
from ..errors_collection import MalformedInput
from ..fixtures import FIXTURES, get_fixture
from ..mesh.io import dump_mesh, dump_deformation
from ..serialize import write_stable
from .utils import command_gatekeeper, RunManifest

logger = log.getLogger('plinv.command')

MESH_FILE: Final = 'mesh.json'
DEFORMATION_FILE: Final = 'deformation.json'
EXPECTATIONS_FILE: Final = 'expectations.json'
RESULTS_FILE: Final = 'results.json'


@command_gatekeeper
def cmd_fixtures(args: argparse.Namespace, manifest: RunManifest):
    if not args.out:
        raise MalformedInput('arguments', 'fixtures needs --out DIR')
    params = {}
    if args.name == 'stacked':
        params = {'n_holes': args.holes, 'target_degree': args.target, 'seed': args.seed}
        params = {k: v for k, v in params.items() if v is not None}
    elif args.holes is not None or args.target is not None:
        raise MalformedInput('arguments', '--holes and --target only apply to the stacked fixture')
    fixture = get_fixture(args.name, args.n, **params)

    os.makedirs(args.out, exist_ok=True)
    written = {
        MESH_FILE: dump_mesh(fixture.mesh, os.path.join(args.out, MESH_FILE)),
        DEFORMATION_FILE: dump_deformation(fixture.pmap.images, MESH_FILE, os.path.join(args.out, DEFORMATION_FILE)),
        EXPECTATIONS_FILE: write_stable(os.path.join(args.out, EXPECTATIONS_FILE), fixture),
    }
    if args.check:
        results = fixture.check(seed=args.seed, grid_resolution=args.resolution)
        failed = [r for r in results if not r.passed]
        for r in failed:
            logger.warning(f'{fixture.name}: {r.expectation.kind} {r.expectation.query} expected '
                           f'{r.expectation.expected}, observed {r.observed}')
        logger.info(f'{fixture.name}: {len(results) - len(failed)}/{len(results)} expectations met')
        written[RESULTS_FILE] = write_stable(os.path.join(args.out, RESULTS_FILE), {
            'fixture': fixture.name,
            'results': results,
            'passed': len(results) - len(failed),
            'total': len(results),
        })
    for name, digest in written.items():
        manifest.add_output(os.path.join(args.out, name), digest)
    logger.info(f'Fixture {fixture.name} written to {args.out}')


def add_parsers(subparsers, common: argparse.ArgumentParser):
    fixtures = subparsers.add_parser('fixtures', parents=[common],
                                     help='write a fixture as mesh, deformation and expectation files')
    fixtures.add_argument('--name', required=True, choices=tuple(FIXTURES))
    fixtures.add_argument('--n', type=int, help='resolution parameter of the fixture')
    fixtures.add_argument('--holes', type=int, help='hole count (stacked)')
    fixtures.add_argument('--target', type=int, help='degree at the common centre (stacked)')
    fixtures.add_argument('--check', action='store_true', help='evaluate the expectations as well')
    fixtures.set_defaults(handler=cmd_fixtures)
