"""
Degree-based conditions: degree at most one on the domain and on a covering, and ball-wise separation.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np

from .. import log
from ..aio_helper import gather_in_pool
from ..degree import PLMap, degree_field, winding_numbers
from ..degree.algorithms import ROUNDING_GUARD
from ..errors_collection import BallTooSmall
from ..mesh.covering import InnerCovering, boundary_distances
from ..mesh.geometry import distance_to_hull_union
from ..mesh.simplicial import SimplicialMesh, submesh
from ..verdict import ConditionVerdict, HOLDS, FAILS, DEG1, DEG1_LOC, INV

logger = log.getLogger('plinv.checker')

INV_CENTERS: Final = 10
INV_RADII: Final = 5
INV_WITNESS_LIMIT: Final = 20
SPHERE_CLEARANCE: Final = 1e-6  # x domain diagonal, vertices this close to a sphere move it
SPHERE_SHRINK: Final = 0.999


def check_DEG1(pmap: PLMap, A: Optional[SimplicialMesh] = None, resolution: Optional[int] = None) -> ConditionVerdict:
    """Holds iff every region of the degree field carries a degree of at most one."""
    report = degree_field(pmap, A, resolution)
    resolution_record = report.grid.resolution_record
    worst = max(report.regions, key=lambda r: (r.degree, -r.label))
    if worst.degree > 1:
        return ConditionVerdict(DEG1, FAILS, {
            'value': worst.representatives[0],
            'degree': worst.degree,
            'region_measure': worst.measure,
        }, resolution_record)
    return ConditionVerdict(DEG1, HOLDS, {'max_degree': report.max_degree, 'sigma': report.sigma}, resolution_record)


def check_DEG1_loc(pmap: PLMap, covering: InnerCovering, resolution: Optional[int] = None) -> ConditionVerdict:
    """:func:`check_DEG1` on every level of the covering."""
    verdicts = gather_in_pool((check_DEG1, (pmap, level, resolution), {}) for level in covering.levels)
    resolution_record = {'levels': len(covering), 'offsets': list(covering.offsets), 'grid_resolution': resolution}
    for m, verdict in enumerate(verdicts):
        if verdict.fails:
            return ConditionVerdict(DEG1_LOC, FAILS, dict(verdict.evidence, level=m), resolution_record)
    return ConditionVerdict(DEG1_LOC, HOLDS, {'max_degrees': [v.evidence['max_degree'] for v in verdicts]},
                            resolution_record)


# ----- INV -----
def _inv_centers(pmap: PLMap, count: int, rng: np.random.Generator) -> np.ndarray:
    """Interior vertices, those next to folded simplices first."""
    mesh = pmap.mesh
    interior = np.flatnonzero(~mesh.boundary_vertex_mask)
    if interior.size == 0:
        return interior
    bad = pmap.determinants <= 0
    suspects = np.unique(mesh.simplices[bad].ravel()) if np.any(bad) else np.zeros(0, dtype=np.int64)
    suspects = np.intersect1d(suspects, interior)[:count // 2]
    rest = np.setdiff1d(interior, suspects)
    picked = rng.choice(rest, size=min(count - suspects.size, rest.size), replace=False) if rest.size else rest
    return np.concatenate([suspects, np.sort(picked)]).astype(np.int64)


def _off_vertices(radius: float, dist: np.ndarray, clearance: float) -> float:
    """Shrink a radius until no vertex lies on its sphere."""
    for _ in range(64):
        if not np.any(np.abs(dist - radius) <= clearance):
            break
        radius *= SPHERE_SHRINK
    return radius


def _ball_samples(pmap: PLMap) -> tuple[np.ndarray, np.ndarray]:
    """Sample points (vertices, then centroids) and their images."""
    mesh = pmap.mesh
    points = np.concatenate([mesh.vertices, mesh.centroids])
    images = np.concatenate([pmap.images, pmap.images[mesh.simplices].mean(axis=1)])
    return points, images


def _test_ball(pmap: PLMap, center: np.ndarray, radius: float, samples: tuple) -> Optional[dict]:
    """
    Separation test of one ball; ``None`` when the ball submesh is empty.

    A sample inside the ball must map into the topological image of the ball or onto its boundary image;
    a sample outside must map off the topological image. Samples on the boundary image are skipped.
    """
    mesh = pmap.mesh
    reach = np.linalg.norm(mesh.vertices[mesh.simplices] - center, axis=2).max(axis=1)
    chosen = np.flatnonzero(reach <= radius)
    if chosen.size == 0:
        return None
    ball = submesh(mesh, chosen)
    local = pmap.restrict(ball)
    points, images = samples

    in_ball = np.zeros(points.shape[0], dtype=bool)
    in_ball[mesh.simplices[chosen].ravel()] = True
    in_ball[mesh.vertex_count + chosen] = True
    on_sphere = np.zeros(points.shape[0], dtype=bool)
    on_sphere[np.unique(mesh.simplices[chosen])[ball.boundary_vertex_mask]] = True

    windings = winding_numbers(local, None, images)
    degrees = np.rint(windings).astype(np.int64)
    settled = np.abs(windings - degrees) <= ROUNDING_GUARD
    suspects = np.flatnonzero(settled & ((in_ball & ~on_sphere & (degrees == 0)) | (~in_ball & (degrees != 0))))
    if suspects.size:
        near = distance_to_hull_union(local.boundary_image_points, images[suspects]) <= local.tau_deg
        suspects = suspects[~near]
    failures = [{
        'part': 'inside' if in_ball[k] else 'outside',
        'point': points[k],
        'value': images[k],
        'degree': int(degrees[k]),
    } for k in suspects[:4]]
    return {
        'center': center,
        'radius': radius,
        'simplices': int(chosen.size),
        'tested': int(np.count_nonzero(settled)),
        'failures': failures,
    }


def check_INV(pmap: PLMap, centers: int = INV_CENTERS, radii_per_center: int = INV_RADII,
              seed: int = 0) -> ConditionVerdict:
    """
    Sampled separation test on balls ``B_r(a)``.

    Centres are interior vertices (vertices of folded simplices first, then seeded random ones); radii are
    ``dist(a, boundary) / 2^(k + 1)``, shrunk so that the sphere misses every vertex. Balls are the simplices
    with all vertices inside the sphere. Samples are mesh vertices and simplex centroids.

    :raise BallTooSmall: every sampled ball is empty
    """
    mesh = pmap.mesh
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1417]))
    chosen = _inv_centers(pmap, centers, rng)
    rho = boundary_distances(mesh)
    clearance = SPHERE_CLEARANCE * mesh.diag
    resolution_record = {'seed': seed, 'centers': centers, 'radii_per_center': radii_per_center,
                         'samples': 'vertices+centroids'}

    balls = []
    for v in chosen:
        dist = np.linalg.norm(mesh.vertices - mesh.vertices[v], axis=1)
        for k in range(radii_per_center):
            balls.append((mesh.vertices[v], _off_vertices(rho[v] / 2 ** (k + 1), dist, clearance)))
    if not balls:
        raise BallTooSmall(mesh.centroids.mean(axis=0), 0.0)

    samples = _ball_samples(pmap)
    results = gather_in_pool((_test_ball, (pmap, center, radius, samples), {}) for center, radius in balls)
    tested = [r for r in results if r is not None]
    if not tested:
        center, radius = balls[-1]
        raise BallTooSmall(center, radius)
    logger.debug(f'INV: {len(tested)} of {len(balls)} balls non-empty')

    witnesses = [dict(f, center=r['center'], radius=r['radius']) for r in tested for f in r['failures']]
    if witnesses:
        return ConditionVerdict(INV, FAILS, {'witnesses': witnesses[:INV_WITNESS_LIMIT],
                                             'failed_balls': sum(1 for r in tested if r['failures'])},
                                resolution_record)
    return ConditionVerdict(INV, HOLDS, {'balls_tested': len(tested), 'balls_empty': len(balls) - len(tested)},
                            resolution_record)
