"""
Structured and Delaunay meshes the fixtures are built on.
"""
from __future__ import annotations
from typing import Callable, Optional, Sequence
from typing_extensions import Final

import itertools
import numpy as np
from scipy.spatial import Delaunay

from ..mesh.simplicial import SimplicialMesh, build_mesh

ALTERNATE: Final = 'alternate'
UNIFORM: Final = 'uniform'


def quad_triangles(index: np.ndarray, closed: bool = False, split: str = ALTERNATE) -> np.ndarray:
    """
    Two triangles per cell of a structured ``(nu, nv)`` grid of vertex ids.

    :param closed: the last row of cells wraps around to the first
    :param split: ``alternate`` flips the diagonal in a checkerboard; ``uniform`` keeps it fixed
    """
    nu, nv = index.shape
    triangles = []
    for i in range(nu if closed else nu - 1):
        i1 = (i + 1) % nu
        for j in range(nv - 1):
            a, b, c, d = index[i, j], index[i1, j], index[i1, j + 1], index[i, j + 1]
            if split == ALTERNATE and (i + j) % 2:
                triangles += [(a, b, d), (b, c, d)]
            else:
                triangles += [(a, b, c), (a, c, d)]
    return np.array(triangles, dtype=np.int64).reshape(-1, 3)


def _compact(vertices: np.ndarray, simplices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    used, inverse = np.unique(simplices, return_inverse=True)
    return vertices[used], inverse.reshape(simplices.shape)


def grid_mesh_2d(lo: Sequence[float], hi: Sequence[float], nx: int, ny: int,
                 keep: Optional[Callable[[np.ndarray], np.ndarray]] = None, split: str = ALTERNATE) -> SimplicialMesh:
    """
    Triangulated rectangle; ``keep`` selects cells by their centres.
    """
    xs = np.linspace(lo[0], hi[0], nx + 1)
    ys = np.linspace(lo[1], hi[1], ny + 1)
    vertices = np.stack(np.meshgrid(xs, ys, indexing='ij'), axis=-1).reshape(-1, 2)
    index = np.arange(vertices.shape[0]).reshape(nx + 1, ny + 1)
    triangles = quad_triangles(index, split=split)
    if keep is not None:
        # cells come in index order, two triangles each
        centres = vertices[index[:-1, :-1].ravel()] + 0.5 * np.array([xs[1] - xs[0], ys[1] - ys[0]])
        triangles = triangles[np.repeat(np.asarray(keep(centres), dtype=bool), 2)]
    return build_mesh(2, *_compact(vertices, triangles))


_KUHN: Final = tuple(itertools.permutations(range(3)))


def kuhn_mesh_3d(lo: Sequence[float], hi: Sequence[float], n: int) -> SimplicialMesh:
    """Cube grid with six tetrahedra per cell along the permutations of the axes."""
    axes = [np.linspace(lo[k], hi[k], n + 1) for k in range(3)]
    vertices = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, 3)
    stride = np.array([(n + 1) ** 2, n + 1, 1])
    corners = np.stack(np.meshgrid(*[np.arange(n)] * 3, indexing='ij'), axis=-1).reshape(-1, 3)
    tets = []
    for perm in _KUHN:
        path = [np.zeros(3, dtype=np.int64)]
        for axis in perm:
            step = path[-1].copy()
            step[axis] += 1
            path.append(step)
        tets.append(np.stack([(corners + p) @ stride for p in path], axis=1))
    return build_mesh(3, vertices, np.concatenate(tets))


def polar_mesh(radii: Sequence[float], angles: np.ndarray, center: bool = False,
               split: str = UNIFORM) -> tuple[SimplicialMesh, np.ndarray]:
    """
    Rings of one radius each, sampled at the same angles; with ``center`` a fan closes the innermost ring.

    :return: the mesh and the ``(vertex_count, 2)`` polar coordinates ``(r, phi)`` of its vertices
    """
    radii = np.asarray(radii, dtype=float)
    r, phi = np.meshgrid(radii, angles, indexing='ij')
    polar = np.stack([r.ravel(), phi.ravel()], axis=1)
    index = np.arange(polar.shape[0]).reshape(radii.size, angles.size).T
    triangles = [quad_triangles(index, closed=True, split=split)]
    if center:
        polar = np.concatenate([polar, [[0.0, 0.0]]])
        apex = polar.shape[0] - 1
        ring = index[:, 0]
        triangles.append(np.stack([np.full(ring.size, apex), ring, np.roll(ring, -1)], axis=1))
    vertices = polar[:, :1] * np.stack([np.cos(polar[:, 1]), np.sin(polar[:, 1])], axis=1)
    return build_mesh(2, vertices, np.concatenate(triangles)), polar


def fan_strip_mesh(columns: np.ndarray, apex: np.ndarray) -> SimplicialMesh:
    """
    A strip of ``(nu, nv, 2)`` column points whose two end columns are closed by fans to a shared apex.
    """
    nu, nv, _ = columns.shape
    vertices = np.concatenate([columns.reshape(-1, 2), np.asarray(apex, dtype=float)[None]])
    index = np.arange(nu * nv).reshape(nu, nv)
    tip = vertices.shape[0] - 1
    fans = [np.stack([np.full(nv - 1, tip), index[k, :-1], index[k, 1:]], axis=1) for k in (0, nu - 1)]
    return build_mesh(2, vertices, np.concatenate([quad_triangles(index)] + fans))


def perforated_disk(radius: float, holes: Sequence[tuple[np.ndarray, float]], spacing: float,
                    rng: np.random.Generator) -> tuple[SimplicialMesh, list[np.ndarray]]:
    """
    Delaunay mesh of a disk with circular holes.

    :return: the mesh and, per hole, the vertex ids of its boundary circle in angular order
    """
    def circle(center, r) -> np.ndarray:
        count = max(12, int(np.ceil(2 * np.pi * r / spacing)))
        phi = 2 * np.pi * np.arange(count) / count
        return np.asarray(center) + r * np.stack([np.cos(phi), np.sin(phi)], axis=1)

    outer = circle((0.0, 0.0), radius)
    rims = [circle(c, r) for c, r in holes]
    xs = np.arange(-radius, radius + spacing, spacing)
    fill = np.stack(np.meshgrid(xs, xs, indexing='ij'), axis=-1).reshape(-1, 2)
    fill = fill + rng.uniform(-0.15, 0.15, size=fill.shape) * spacing
    clear = np.linalg.norm(fill, axis=1) < radius - 0.6 * spacing
    for c, r in holes:
        clear &= np.linalg.norm(fill - np.asarray(c), axis=1) > r + 0.6 * spacing
    points = np.concatenate([outer] + rims + [fill[clear]])
    triangles = Delaunay(points).simplices
    centres = points[triangles].mean(axis=1)
    inside = np.linalg.norm(centres, axis=1) < radius
    for c, r in holes:
        inside &= np.linalg.norm(centres - np.asarray(c), axis=1) > r
    triangles = triangles[inside]
    used = np.unique(triangles)
    mesh = build_mesh(2, points[used], np.searchsorted(used, triangles))
    rim_ids, offset = [], outer.shape[0]
    for rim in rims:
        rim_ids.append(np.searchsorted(used, np.arange(offset, offset + rim.shape[0])))
        offset += rim.shape[0]
    return mesh, rim_ids
