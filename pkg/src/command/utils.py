from __future__ import annotations
from typing import Optional, Any, Iterable, Sequence
from collections.abc import Callable
from typing_extensions import Final

import argparse
import csv
import io
import os
import sys
from functools import partial, wraps
from attrs import define, Factory

from .. import env, log
from ..degree import PLMap
from ..errors_collection import InputErrors, MalformedInput, PlinvError
from ..mesh.io import load_mesh, load_deformation, load_images
from ..mesh.covering import inner_covering
from ..mesh.simplicial import SimplicialMesh
from ..serialize import dumps_stable, write_stable, file_digest
from ..verdict import ConditionVerdict

logger = log.getLogger('plinv.command')

EXIT_OK: Final = 0
EXIT_FAILS: Final = 1
EXIT_INPUT: Final = 2

MANIFEST_SUFFIX: Final = '.manifest.json'
UNRECORDED_FLAGS: Final = ('handler', 'manifest')


# ----- manifest -----
@define
class RunManifest:
    """
    Everything needed to replay a run: the subcommand, its full flag set, the seed and the digests of
    every file read or written.
    """
    command: str
    seed: int = 0
    parameters: dict = Factory(dict)
    inputs: dict = Factory(dict)
    outputs: dict = Factory(dict)
    version: str = env.VERSION

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunManifest:
        parameters = {k: v for k, v in sorted(vars(args).items()) if k not in UNRECORDED_FLAGS}
        return cls(command=args.command, seed=int(getattr(args, 'seed', 0) or 0), parameters=parameters)

    def add_input(self, path: str) -> str:
        digest = file_digest(path)
        self.inputs[str(path)] = digest
        return digest

    def add_output(self, path: str, digest: Optional[str] = None) -> str:
        digest = digest or file_digest(path)
        self.outputs[str(path)] = digest
        return digest

    def to_dict(self) -> dict:
        return {
            'command': self.command,
            'seed': self.seed,
            'parameters': self.parameters,
            'inputs': self.inputs,
            'outputs': self.outputs,
            'versions': self.version,
        }


def manifest_path(args: argparse.Namespace) -> Optional[str]:
    if getattr(args, 'manifest', None):
        return args.manifest
    out = getattr(args, 'out', None)
    return os.fspath(out).rstrip('/\\') + MANIFEST_SUFFIX if out else None


# ----- gatekeeper -----
def _any_fails(verdicts: Optional[Iterable[ConditionVerdict]]) -> list[str]:
    return [v.condition for v in verdicts or () if v.fails]


def command_gatekeeper(func: Optional[Callable] = None,
                       *,
                       strict_capable: bool = False):
    """
    Wrap a ``cmd_*`` handler ``(args, manifest) -> verdicts or None`` into ``(args) -> exit status``.

    Input errors end the run with :data:`EXIT_INPUT`. With ``strict_capable`` and ``--strict``, a ``Fails``
    verdict among the returned ones ends it with :data:`EXIT_FAILS`. The manifest is written in both cases.
    """
    if func is None:
        return partial(command_gatekeeper, strict_capable=strict_capable)

    @wraps(func)
    def wrapper(args: argparse.Namespace) -> int:
        manifest = RunManifest.from_args(args)
        status = EXIT_OK
        try:
            verdicts = func(args, manifest)
        except InputErrors as e:
            logger.error(f'{args.command}: {type(e).__name__}: {e}')
            manifest.outputs['error'] = f'{type(e).__name__}: {e}'
            status = EXIT_INPUT
        except (OSError, PlinvError) as e:
            logger.error(f'{args.command} aborted: {type(e).__name__}: {e}', exc_info=env.DEBUG)
            manifest.outputs['error'] = f'{type(e).__name__}: {e}'
            status = EXIT_INPUT
        else:
            failed = _any_fails(verdicts) if strict_capable and getattr(args, 'strict', False) else []
            if failed:
                logger.warning(f'{args.command}: strict mode, {", ".join(failed)} failed')
                status = EXIT_FAILS
        target = manifest_path(args)
        if target:
            write_stable(target, manifest)
            logger.debug(f'Manifest written to {target}')
        return status

    return wrapper


# ----- inputs -----
def parse_point(text: str) -> tuple[float, ...]:
    """``"x,y"`` or ``"x,y,z"``."""
    try:
        point = tuple(float(c) for c in text.replace(' ', '').split(','))
    except ValueError:
        raise MalformedInput('query point', f'{text!r} is not a comma separated list of numbers') from None
    if len(point) not in (2, 3):
        raise MalformedInput('query point', f'{text!r} needs 2 or 3 coordinates')
    return point


def parse_names(text: str) -> list[str]:
    return [name for name in text.replace(' ', '').split(',') if name]


def load_map(args: argparse.Namespace, manifest: RunManifest) -> PLMap:
    """
    The deformation given by ``--map``. With ``--mesh`` the images are read against that mesh,
    otherwise against the deformation's own ``mesh_ref``.
    """
    if not getattr(args, 'map', None):
        raise MalformedInput('arguments', '--map is required')
    manifest.add_input(args.map)
    if getattr(args, 'mesh', None):
        manifest.add_input(args.mesh)
        mesh = load_mesh(args.mesh)
        images = load_images(args.map, mesh)
    else:
        mesh, images, _ = load_deformation(args.map)
    logger.info(f'Loaded a {mesh.dim}D map on {mesh.simplex_count} simplices')
    return PLMap.from_images(mesh, images)


def covering_level(pmap: PLMap, level: Optional[int], resolution: Optional[int] = None) -> Optional[SimplicialMesh]:
    """Level ``level`` (from 1) of the inner covering, or ``None`` for the whole domain."""
    if not level:
        return None
    return inner_covering(pmap.mesh, level, check_complement=False, resolution=resolution).levels[-1]


# ----- outputs -----
def emit_report(args: argparse.Namespace, manifest: RunManifest, report: Any):
    """Write the report to ``--out``, or to stdout without one."""
    out = getattr(args, 'out', None)
    if out:
        manifest.add_output(out, write_stable(out, report))
        logger.info(f'Report written to {out}')
    else:
        sys.stdout.write(dumps_stable(report))


def write_table(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV with floats at 17 significant digits; returns the digest through :func:`file_digest`."""
    buffer = io.StringIO(newline='')
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(c, '.17g') if isinstance(c, float) else c for c in row])
    directory = os.path.dirname(os.fspath(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(buffer.getvalue())
    return file_digest(path)


def table_path(args: argparse.Namespace, name: str) -> Optional[str]:
    """``<out>.<name>.csv`` next to the report, or nothing without ``--out``."""
    out = getattr(args, 'out', None)
    return f'{os.fspath(out).rstrip("/")}.{name}.csv' if out else None


# ----- flags -----
def add_map_flags(parser: argparse.ArgumentParser, submesh: bool = True):
    parser.add_argument('--mesh', help='mesh file (overrides the mesh_ref of the deformation)')
    parser.add_argument('--map', required=True, help='deformation file')
    if submesh:
        parser.add_argument('--submesh', type=int, default=0, metavar='LEVEL',
                            help='restrict to level LEVEL of the inner covering (0: whole domain)')
