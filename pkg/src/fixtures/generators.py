"""
Seeded random meshes and maps for property tests.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np

from ..degree import PLMap
from ..mesh.geometry import distance_to_hull_union
from ..mesh.simplicial import SimplicialMesh, build_mesh
from .meshes import kuhn_mesh_3d

JITTER_2D: Final = 0.2  # x cell size
JITTER_3D: Final = 0.05
SHRINK_LIMIT: Final = 30


def random_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream]))


def _jitter_interior(mesh: SimplicialMesh, rng: np.random.Generator, amount: float) -> SimplicialMesh:
    vertices = mesh.vertices.copy()
    interior = ~mesh.boundary_vertex_mask
    vertices[interior] += rng.uniform(-amount, amount, size=(int(interior.sum()), mesh.dim))
    return build_mesh(mesh.dim, vertices, mesh.simplices)


def random_mesh_2d(rng: np.random.Generator, k: Optional[int] = None) -> SimplicialMesh:
    """Unit square with ``k x k`` cells (``2 k^2`` triangles, ``k`` drawn from 2..10), random diagonals and jitter."""
    k = int(rng.integers(2, 11)) if k is None else k
    xs = np.linspace(0.0, 1.0, k + 1)
    vertices = np.stack(np.meshgrid(xs, xs, indexing='ij'), axis=-1).reshape(-1, 2)
    index = np.arange(vertices.shape[0]).reshape(k + 1, k + 1)
    a, b = index[:-1, :-1].ravel(), index[1:, :-1].ravel()
    c, d = index[1:, 1:].ravel(), index[:-1, 1:].ravel()
    flip = rng.random(a.size) < 0.5
    first = np.where(flip[:, None], np.stack([a, b, d], axis=1), np.stack([a, b, c], axis=1))
    second = np.where(flip[:, None], np.stack([b, c, d], axis=1), np.stack([a, c, d], axis=1))
    mesh = build_mesh(2, vertices, np.concatenate([first, second]))
    return _jitter_interior(mesh, rng, JITTER_2D / k)


def random_mesh_3d(rng: np.random.Generator, k: Optional[int] = None) -> SimplicialMesh:
    """Unit cube with ``k^3`` Kuhn cells (``k`` drawn from 1..3) and slightly jittered interior vertices."""
    k = int(rng.integers(1, 4)) if k is None else k
    return _jitter_interior(kuhn_mesh_3d((0.0,) * 3, (1.0,) * 3, k), rng, JITTER_3D / k)


def _rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_map(mesh: SimplicialMesh, rng: np.random.Generator, reflect: bool = False) -> PLMap:
    """
    An orientation preserving map: a random rotation and stretch plus a smooth perturbation whose amplitude
    is halved until every determinant is positive. ``reflect`` mirrors the first coordinate afterwards.
    """
    d = mesh.dim
    linear = _rotation(rng, d) @ np.diag(rng.uniform(0.5, 2.0, size=d))
    shift = rng.uniform(-1.0, 1.0, size=d)
    frequency = rng.uniform(1.0, 4.0, size=(d, d))
    phase = rng.uniform(0.0, 2 * np.pi, size=d)
    wave = np.sin(mesh.vertices @ frequency + phase)
    amplitude = rng.uniform(0.05, 0.3)
    base = mesh.vertices @ linear.T + shift
    for _ in range(SHRINK_LIMIT):
        images = base + amplitude * wave
        if np.all(PLMap.from_images(mesh, images).determinants > 0):
            break
        amplitude *= 0.5
    else:
        images = base
    if reflect:
        images = images * np.r_[-1.0, np.ones(d - 1)]
    return PLMap.from_images(mesh, images)


def random_folded_map(mesh: SimplicialMesh, rng: np.random.Generator) -> PLMap:
    """A map folding the domain over a random line (plane), with a small random perturbation."""
    d = mesh.dim
    normal = rng.normal(size=d)
    normal /= np.linalg.norm(normal)
    offset = float(mesh.vertices.mean(axis=0) @ normal) + rng.uniform(-0.1, 0.1)
    height = mesh.vertices @ normal - offset
    images = mesh.vertices - 2 * np.minimum(height, 0.0)[:, None] * normal
    images += rng.uniform(-0.02, 0.02, size=images.shape)
    return PLMap.from_images(mesh, images)


def sample_values(pmap: PLMap, rng: np.random.Generator, count: int, clearance: float = 10.0) -> np.ndarray:
    """
    Uniform values in the padded image bounding box farther than ``clearance * tau_deg`` from the boundary
    image.
    """
    lo, hi = pmap.image_bbox
    pad = 0.1 * (hi - lo)
    points = rng.uniform(lo - pad, hi + pad, size=(count, pmap.dim))
    dist = distance_to_hull_union(pmap.boundary_image_points, points)
    return points[dist > clearance * pmap.tau_deg]
