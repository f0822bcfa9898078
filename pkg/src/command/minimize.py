from __future__ import annotations

import argparse

from .. import log
from ..degree import PLMap
from ..elasticity import EnergyModel, scaled_translate, minimize, constraint_by_name, certify_minimizer
from ..elasticity.minimize import GRADIENT_TOLERANCE
from ..errors_collection import MalformedInput, InfeasibleInitial
from ..mesh.io import load_mesh, load_images, deformation_to_dict
from ..serialize import read_structured
from .utils import command_gatekeeper, RunManifest, emit_report, write_table, table_path

logger = log.getLogger('plinv.command')


def load_model(path: str) -> EnergyModel:
    try:
        data = read_structured(path)
    except (OSError, ValueError) as e:
        raise MalformedInput('energy model', f'{path}: {e}') from e
    return EnergyModel.from_dict(data)


@command_gatekeeper(strict_capable=True)
def cmd_minimize(args: argparse.Namespace, manifest: RunManifest):
    manifest.add_input(args.mesh)
    manifest.add_input(args.model)
    mesh = load_mesh(args.mesh)
    model = load_model(args.model)
    if args.initial:
        manifest.add_input(args.initial)
        initial = PLMap.from_images(mesh, load_images(args.initial, mesh))
    elif model.box is not None:
        initial = scaled_translate(mesh, model.box)
    else:
        raise InfeasibleInitial('no --initial deformation and no box to place the scaled translate in')

    record = minimize(model, initial, constraint_by_name(args.constraint, args.seed), args.budget, args.tol)
    logger.info(f'{record.termination} after {record.iterations} iterations, energy {record.final_energy:.10g}')
    verdicts = []
    if args.certify:
        record.certificate = certify_minimizer(record, args.seed)
        verdicts.append(record.certificate.injective_ae)
        logger.info(f'Certificates issued: {", ".join(record.certificate.issued) or "none"}')

    report = record.to_dict()
    report['final_deformation'] = deformation_to_dict(record.final_map.images, mesh)
    emit_report(args, manifest, report)
    table = table_path(args, 'trace')
    if table:
        manifest.add_output(table, write_table(
            table, ('iteration', 'energy', 'objective'),
            ((i, float(e), float(o)) for i, (e, o) in enumerate(zip(record.iterates, record.objectives))),
        ))
    return verdicts


def add_parsers(subparsers, common: argparse.ArgumentParser):
    parser = subparsers.add_parser('minimize', parents=[common],
                                   help='minimize a polyconvex energy over maps kept in a box')
    parser.add_argument('--mesh', required=True, help='reference mesh file')
    parser.add_argument('--model', required=True, help='energy model file (family, p, r, s, c, q, g, box)')
    parser.add_argument('--initial', help='initial deformation (default: scaled translate into the box)')
    parser.add_argument('--constraint', default='deg1loc', help='deg1loc or cncpenalty')
    parser.add_argument('--budget', type=int, default=2000, help='iteration budget')
    parser.add_argument('--tol', type=float, default=GRADIENT_TOLERANCE, help='gradient norm to stop at')
    parser.add_argument('--certify', action='store_true', help='certify the final map')
    parser.add_argument('--strict', action='store_true', help='exit with status 1 if the certification fails')
    parser.set_defaults(handler=cmd_minimize)
