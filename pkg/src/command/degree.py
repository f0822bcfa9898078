from __future__ import annotations
from typing_extensions import Final

import argparse

from .. import log
from ..degree import degree_boundary, degree_regular_sum, degree_integral, degree_field, preimages
from ..fixtures import DEGREE_ALGORITHMS
from .utils import (
    command_gatekeeper, RunManifest, load_map, parse_point, covering_level, emit_report, write_table, table_path,
    add_map_flags,
)

logger = log.getLogger('plinv.command')

ALL_ALGORITHMS: Final = 'all'
_ALGORITHMS: Final = {
    'boundary': degree_boundary,
    'regular-sum': degree_regular_sum,
    'integral': degree_integral,
}


@command_gatekeeper
def cmd_degree(args: argparse.Namespace, manifest: RunManifest):
    pmap = load_map(args, manifest)
    z = parse_point(args.query)
    A = covering_level(pmap, args.submesh, args.resolution)
    names = DEGREE_ALGORITHMS if args.algorithm == ALL_ALGORITHMS else (args.algorithm,)
    degrees = {name: _ALGORITHMS[name](pmap, A, z) for name in names}
    found = preimages(pmap.restrict(A), z)
    logger.info(f'deg at {z}: ' + ', '.join(f'{k} {v}' for k, v in degrees.items()))
    emit_report(args, manifest, {
        'query': z,
        'submesh': args.submesh,
        'degrees': degrees,
        'preimage_count': found.count,
        'signed_preimage_count': found.signed_count,
    })


@command_gatekeeper
def cmd_degree_field(args: argparse.Namespace, manifest: RunManifest):
    pmap = load_map(args, manifest)
    A = covering_level(pmap, args.submesh, args.resolution)
    report = degree_field(pmap, A, args.resolution)
    logger.info(f'{len(report.regions)} regions, sigma {report.sigma}')
    emit_report(args, manifest, report)
    table = table_path(args, 'regions')
    if table:
        manifest.add_output(table, write_table(
            table,
            ('label', 'degree', 'bounded', 'measure', 'clearance') + tuple(f'x{i}' for i in range(pmap.dim)),
            ((r.label, r.degree, r.bounded, float(r.measure), float(r.clearance),
              *(float(c) for c in r.representatives[0])) for r in report.regions),
        ))


def add_parsers(subparsers, common: argparse.ArgumentParser):
    degree = subparsers.add_parser('degree', parents=[common], help='degree of the map at one value')
    add_map_flags(degree)
    degree.add_argument('--query', required=True, help='value "zx,zy[,zz]"')
    degree.add_argument('--algorithm', choices=(*_ALGORITHMS, ALL_ALGORITHMS), default='boundary')
    degree.set_defaults(handler=cmd_degree)

    field = subparsers.add_parser('degree-field', parents=[common],
                                  help='degree on every region of the complement of the boundary image')
    add_map_flags(field)
    field.set_defaults(handler=cmd_degree_field)

