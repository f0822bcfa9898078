from __future__ import annotations

import argparse

from .. import log
from ..errors_collection import CannotSeparate
from ..mesh.covering import inner_covering
from ..topology import topology_report, isolate_component
from .utils import command_gatekeeper, RunManifest, load_map, parse_point, emit_report, add_map_flags

logger = log.getLogger('plinv.command')


@command_gatekeeper
def cmd_topology(args: argparse.Namespace, manifest: RunManifest):
    pmap = load_map(args, manifest)
    covering = inner_covering(pmap.mesh, args.covering, resolution=args.resolution)
    query = parse_point(args.query) if args.query else None
    report = topology_report(pmap, covering, args.resolution, query, args.eta)
    out = report.to_dict()
    out['covering'] = covering.to_dict()
    if args.isolate and report.preimage is not None:
        isolated = []
        for piece in report.preimage.inner:
            try:
                isolated.append(isolate_component(pmap, piece, args.isolate, query).to_dict())
            except CannotSeparate as e:
                logger.warning(f'{e}')
                isolated.append({'error': str(e)})
        out['isolated'] = isolated
    logger.info(f'im_T measure {report.im_T.measure:.6g}, im_loc measure {report.im_loc.union.measure:.6g}, '
                f'{report.reduced_domain.excluded_simplices.size} simplices outside the reduced domain')
    emit_report(args, manifest, out)


def add_parsers(subparsers, common: argparse.ArgumentParser):
    topology = subparsers.add_parser('topology', parents=[common],
                                     help='topological and localized images, reduced domain, preimage pieces')
    add_map_flags(topology, submesh=False)
    topology.add_argument('--covering', type=int, default=3, metavar='K', help='number of inner covering levels')
    topology.add_argument('--query', help='value "zx,zy[,zz]" whose preimage pieces are reported')
    topology.add_argument('--eta', type=float, help='preimage thickening (default: from the clearance of the value)')
    topology.add_argument('--isolate', type=int, default=0, metavar='N',
                          help='isolate every inner preimage piece within 1/N')
    topology.set_defaults(handler=cmd_topology)
