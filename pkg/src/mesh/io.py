"""
Mesh and deformation files.

Mesh file: ``{"dim": d, "vertices": [[x, y(, z)], ...], "simplices": [[i, j, k(, l)], ...]}``, 0-based indices.
Deformation file: ``{"mesh_ref": <path relative to the file, or an inline mesh>, "images": [[...], ...]}``.
"""
from __future__ import annotations
from typing import Union, Any
from os import PathLike, path as os_path

import numpy as np

from ..errors_collection import MalformedInput
from ..serialize import read_structured, write_stable
from .simplicial import SimplicialMesh, build_mesh

StrPath = Union[str, PathLike]


def mesh_from_dict(data: Any) -> SimplicialMesh:
    if not isinstance(data, dict) or not {'dim', 'vertices', 'simplices'} <= data.keys():
        raise MalformedInput('mesh file', 'expected the fields dim, vertices and simplices')
    try:
        dim = int(data['dim'])
        vertices = np.asarray(data['vertices'], dtype=float)
        simplices = np.asarray(data['simplices'], dtype=np.int64)
    except (TypeError, ValueError) as e:
        raise MalformedInput('mesh file', str(e)) from e
    return build_mesh(dim, vertices, simplices)


def load_mesh(path: StrPath) -> SimplicialMesh:
    try:
        data = read_structured(path)
    except (OSError, ValueError) as e:
        raise MalformedInput('mesh file', f'{path}: {e}') from e
    return mesh_from_dict(data)


def dump_mesh(mesh: SimplicialMesh, path: StrPath) -> str:
    return write_stable(path, mesh.to_dict())


def _read_deformation(path: StrPath) -> dict:
    try:
        data = read_structured(path)
    except (OSError, ValueError) as e:
        raise MalformedInput('deformation file', f'{path}: {e}') from e
    if not isinstance(data, dict) or not {'mesh_ref', 'images'} <= data.keys():
        raise MalformedInput('deformation file', 'expected the fields mesh_ref and images')
    return data


def load_deformation(path: StrPath) -> tuple[SimplicialMesh, np.ndarray, Any]:
    """
    Read a deformation file.

    :return: the mesh, the ``(n, d)`` vertex images and the raw ``mesh_ref`` value
    """
    data = _read_deformation(path)
    ref = data['mesh_ref']
    if isinstance(ref, str):
        mesh = load_mesh(os_path.join(os_path.dirname(os_path.abspath(path)), ref))
    else:
        mesh = mesh_from_dict(ref)
    images = images_from_value(data['images'], mesh)
    return mesh, images, ref


def images_from_value(value: Any, mesh: SimplicialMesh) -> np.ndarray:
    try:
        images = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise MalformedInput('deformation file', str(e)) from e
    if images.shape != mesh.vertices.shape:
        raise MalformedInput('deformation file',
                             f'images have shape {images.shape}, the mesh needs {mesh.vertices.shape}')
    if not np.all(np.isfinite(images)):
        raise MalformedInput('deformation file', 'images must be finite')
    return images


def deformation_to_dict(images: np.ndarray, mesh_ref: Any) -> dict:
    if isinstance(mesh_ref, SimplicialMesh):
        mesh_ref = mesh_ref.to_dict()
    return {'mesh_ref': mesh_ref, 'images': np.asarray(images, dtype=float)}


def dump_deformation(images: np.ndarray, mesh_ref: Any, path: StrPath) -> str:
    return write_stable(path, deformation_to_dict(images, mesh_ref))


def load_images(path: StrPath, mesh: SimplicialMesh) -> np.ndarray:
    """Vertex images of a deformation file read against a given mesh; ``mesh_ref`` is ignored."""
    return images_from_value(_read_deformation(path)['images'], mesh)
