"""
Example maps with published degree values, meshed at a resolution ``n``.

Smooth boundaries are polygonalized at resolution ``n``; integer expectations are only placed at values
farther than ``4 / n`` from the boundary image.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import itertools
import math
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from ..degree import PLMap
from ..errors_collection import MalformedInput
from ..mesh.simplicial import SimplicialMesh
from ..verdict import CNC, DEG1, FAILS
from .base import (
    Fixture, Expectation, PUBLISHED, DERIVED, DEGREE, PREIMAGE_COUNT, VERDICT, COMPLEMENT_COUNT,
    BOUNDARY_INJECTIVE, CNC_RATIO,
)
from .meshes import UNIFORM, polar_mesh, fan_strip_mesh, perforated_disk

E1: Final = np.array([1.0, 0.0])
STACKED_CENTER: Final = np.array([5.0, 0.0])
STACKED_HOLE_RADIUS: Final = 0.25
STACKED_MAX_HOLES: Final = 8


def _ring_count(n: int, width: float) -> int:
    return max(2, round(n * width / (2 * math.pi)))


def _require(condition: bool, name: str, reason: str):
    if not condition:
        raise MalformedInput(f'{name} fixture', reason)


# ----- angle doubling -----
def fixture_angle_doubling(n: int = 64) -> Fixture:
    """The unit disk wrapped twice around the origin: ``r e^{i phi} -> r e^{2 i phi}``."""
    _require(n >= 16 and n % 2 == 0, 'angle-doubling', f'n must be even and at least 16, got {n}')
    rings = _ring_count(n, 1.0)
    radii = np.arange(1, rings + 1) / rings
    mesh, polar = polar_mesh(radii, 2 * np.pi * np.arange(n) / n, center=True, split=UNIFORM)
    r, phi = polar[:, 0], polar[:, 1]
    images = r[:, None] * np.stack([np.cos(2 * phi), np.sin(2 * phi)], axis=1)
    z = (0.3, 0.2)
    expectations = [
        Expectation(DEGREE, z, 2, PUBLISHED, 'degree two at every value close to the origin'),
        Expectation(PREIMAGE_COUNT, z, 2, PUBLISHED, 'two antipodal preimages'),
        Expectation(VERDICT, DEG1, FAILS, PUBLISHED, 'degree two exceeds one'),
        Expectation(VERDICT, CNC, FAILS, PUBLISHED, 'the Jacobian integral counts the disk twice'),
        Expectation(CNC_RATIO, None, 2.0, DERIVED, 'exact polygon areas at resolution n', tolerance=1e-2),
    ]
    return Fixture('angle-doubling', PLMap.from_images(mesh, images), expectations, n)


# ----- annulus translation -----
def fixture_annulus_translation(n: int = 64) -> Fixture:
    """
    The annulus ``1 < |x| < 2`` with the outer circle fixed and the inner circle moved to ``(3, 0) + S^1``:
    ``y(x) = x + (2 - |x|) / |x| * (3, 0)``.
    """
    _require(n >= 32, 'annulus', f'n must be at least 32, got {n}')
    rings = _ring_count(n, 1.0)
    radii = 1 + np.arange(rings + 1) / rings
    # half-step phase keeps the two boundary circles apart near (2, 0)
    mesh, polar = polar_mesh(radii, 2 * np.pi * (np.arange(n) + 0.5) / n, split=UNIFORM)
    r = polar[:, 0]
    images = mesh.vertices + ((2 - r) / r)[:, None] * (3 * E1)
    expectations = [
        Expectation(DEGREE, (0.0, 0.0), 1, PUBLISHED, 'inside the fixed outer circle'),
        Expectation(DEGREE, (3.0, 0.0), -1, PUBLISHED, 'inside the translated inner circle'),
        Expectation(BOUNDARY_INJECTIVE, None, True, PUBLISHED, 'two circles outside of each other'),
        Expectation(COMPLEMENT_COUNT, None, 3, PUBLISHED, 'the domain boundary has two circles'),
    ]
    return Fixture('annulus', PLMap.from_images(mesh, images), expectations, n)


# ----- cone flip -----
def _tangent_ball(theta: float, side: float) -> tuple[float, float]:
    """Centre on the axis and radius of the ball tangent to the cone sides at distance ``side`` from the tip."""
    center = side / math.cos(theta)
    return center, side * math.tan(theta)


def _cone_ball_contains(points: np.ndarray, theta: float, side: float) -> np.ndarray:
    """Membership in the convex hull of the tip and the tangent ball."""
    center, radius = _tangent_ball(theta, side)
    in_ball = np.linalg.norm(points - center * E1, axis=-1) < radius
    x, y = points[..., 0], points[..., 1]
    in_cone = (np.abs(y) < x * math.tan(theta)) & (x < side * math.cos(theta))
    return in_ball | in_cone


def _cone_ball_boundary(theta: float, side: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """
    ``count`` points of the boundary, tip excluded, in arc-length order from the upper side over the cap
    back along the lower side, with the outward normals there.
    """
    center, radius = _tangent_ball(theta, side)
    opening = math.pi / 2 + theta
    length = 2 * side + 2 * opening * radius
    u = length * np.arange(1, count + 1) / (count + 1)
    points = np.empty((count, 2))
    normals = np.empty((count, 2))
    upper = u <= side
    lower = u >= length - side
    cap = ~(upper | lower)
    points[upper] = u[upper, None] * np.array([math.cos(theta), math.sin(theta)])
    normals[upper] = (-math.sin(theta), math.cos(theta))
    points[lower] = (length - u[lower])[:, None] * np.array([math.cos(theta), -math.sin(theta)])
    normals[lower] = (-math.sin(theta), -math.cos(theta))
    alpha = opening - (u[cap] - side) / radius
    normals[cap] = np.stack([np.cos(alpha), np.sin(alpha)], axis=1)
    points[cap] = center * E1 + radius * normals[cap]
    return points, normals


def _ray_exit(origins: np.ndarray, directions: np.ndarray, theta: float, side: float, far: float,
              steps: int = 60) -> np.ndarray:
    lo = np.zeros(origins.shape[0])
    hi = np.full(origins.shape[0], far)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        inside = _cone_ball_contains(origins + mid[:, None] * directions, theta, side)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return origins + hi[:, None] * directions


def _cone_flip_geometry(n: int) -> tuple[SimplicialMesh, np.ndarray]:
    """Mesh of the region between two nested cone-and-ball shapes sharing a tip, and the unflipped images."""
    inner_theta, inner_side = math.acos(2 / 3), 1.0
    outer_theta, outer_side = math.acos(1 / 3), 2.0
    q, normals = _cone_ball_boundary(inner_theta, inner_side, n)
    center, radius = _tangent_ball(outer_theta, outer_side)
    p = _ray_exit(q, normals, outer_theta, outer_side, far=2 * (center + radius))
    layers = max(4, n // 4)
    t = np.arange(layers + 1) / layers
    columns = q[:, None, :] + t[None, :, None] * (p - q)[:, None, :]
    mesh = fan_strip_mesh(columns, np.zeros(2))
    reflected = q * np.array([-1.0, 1.0])
    images = (1 - t)[None, :, None] * reflected[:, None, :] + t[None, :, None] * p[:, None, :]
    # the apex is the last vertex and stays at the tip
    images = np.concatenate([images.reshape(-1, 2), np.zeros((1, 2))])
    return mesh, images


def _fold(z: np.ndarray) -> np.ndarray:
    """``(z1, z2) -> (z1, z1 z2)``: orientation preserving on the right half plane, reversing on the left."""
    return np.stack([z[:, 0], z[:, 0] * z[:, 1]], axis=1)


def fixture_cone_flip(n: int = 64, flip: bool = True) -> Fixture:
    """
    A domain with connected boundary and a deformation whose degree takes both signs.

    The inner boundary is reflected to the left half plane, the outer boundary stays fixed, and the
    segments between them are interpolated linearly. ``flip`` composes with :func:`_fold`, which reverses
    orientation on the reflected part.
    """
    _require(n >= 32, 'cone-flip', f'n must be at least 32, got {n}')
    mesh, images = _cone_flip_geometry(n)
    if flip:
        expectations = [
            Expectation(DEGREE, E1, 1, PUBLISHED, 'positive degree at e'),
            Expectation(DEGREE, -E1, -1, PUBLISHED, 'negative degree at -e'),
        ]
        return Fixture('cone-flip', PLMap.from_images(mesh, _fold(images)), expectations, n)
    expectations = [
        Expectation(DEGREE, E1, 1, PUBLISHED, 'degree one on the fixed outer component'),
        Expectation(DEGREE, -E1, 1, PUBLISHED, 'degree one on the reflected inner component'),
    ]
    return Fixture('cone-flip-intermediate', PLMap.from_images(mesh, images), expectations, n)


# ----- stacked holes -----
def _hole_centers(count: int) -> np.ndarray:
    if count == 1:
        return np.zeros((1, 2))
    phi = 2 * np.pi * np.arange(count) / count
    return np.stack([np.cos(phi), np.sin(phi)], axis=1)


def harmonic_extension(mesh: SimplicialMesh, fixed: np.ndarray, values: np.ndarray) -> np.ndarray:
    """
    Vertex images minimizing the graph Dirichlet energy with ``values`` prescribed on the ``fixed`` vertices.
    """
    pairs = np.array([(s[i], s[j]) for s in mesh.simplices for i, j in itertools.combinations(range(mesh.dim + 1), 2)])
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    count = mesh.vertex_count
    rows, cols = np.r_[pairs[:, 0], pairs[:, 1]], np.r_[pairs[:, 1], pairs[:, 0]]
    adjacency = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(count, count)).tocsr()
    laplacian = (coo_matrix((np.asarray(adjacency.sum(axis=1)).ravel(), (np.arange(count), np.arange(count))),
                            shape=(count, count)) - adjacency).tocsr()
    free = np.flatnonzero(~fixed)
    out = np.array(values, dtype=float)
    if free.size:
        rhs = -laplacian[free][:, fixed] @ out[fixed]
        solution = spsolve(laplacian[free][:, free].tocsc(), rhs)
        out[free] = np.asarray(solution).reshape(free.size, -1)
    return out


def fixture_stacked_holes(n_holes: int = 2, target_degree: Optional[int] = None, n: int = 64,
                          seed: int = 0) -> Fixture:
    """
    A disk with ``n_holes`` holes whose boundary circles are sent to concentric circles around one value,
    all with the same orientation, so the degree there telescopes to ``target_degree``.

    The outer circle is fixed; interior vertices follow the harmonic extension of the boundary values.
    """
    target_degree = n_holes if target_degree is None else target_degree
    _require(n_holes == abs(target_degree) and n_holes >= 1, 'stacked',
             f'need n_holes = |target_degree| >= 1, got {n_holes} and {target_degree}')
    _require(n_holes <= STACKED_MAX_HOLES, 'stacked', f'at most {STACKED_MAX_HOLES} holes, got {n_holes}')
    _require(n >= 16, 'stacked', f'n must be at least 16, got {n}')
    centers = _hole_centers(n_holes)
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, n_holes]))
    mesh, rims = perforated_disk(2.0, [(c, STACKED_HOLE_RADIUS) for c in centers], 8.0 / n, rng)

    values = mesh.vertices.copy()
    fixed = mesh.boundary_vertex_mask.copy()
    # a rim traversed with the domain orientation winds -1 around its image centre unless mirrored
    sense = -1.0 if target_degree > 0 else 1.0
    for j, (center, ids) in enumerate(zip(centers, rims)):
        rel = mesh.vertices[ids] - center
        phi = np.arctan2(rel[:, 1], rel[:, 0])
        rho = 0.5 + 0.25 * j
        values[ids] = STACKED_CENTER + rho * np.stack([np.cos(phi), sense * np.sin(phi)], axis=1)
        fixed[ids] = True
    images = harmonic_extension(mesh, fixed, values)

    expectations = [
        Expectation(DEGREE, STACKED_CENTER, target_degree, DERIVED,
                    f'{n_holes} nested hole images telescope at their common centre'),
        Expectation(BOUNDARY_INJECTIVE, None, True, DERIVED, 'disjoint boundary circles'),
    ]
    name = f'stacked(holes={n_holes}, degree={target_degree})'
    return Fixture(name, PLMap.from_images(mesh, images), expectations, n,
                   {'n_holes': n_holes, 'target_degree': target_degree, 'seed': seed})
