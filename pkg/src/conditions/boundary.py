"""
Boundary injectivity, approximate invertibility on the boundary (AIB) and injectivity of the whole map.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np
from attrs import frozen
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import log
from ..aio_helper import gather_in_pool
from ..degree import PLMap, degree_field
from ..mesh.covering import InnerCovering
from ..mesh.geometry import (
    bounding_boxes, overlapping_box_pairs, segment_segment_distance, proper_crossing_depth_2d,
    triangle_triangle_distance, segment_triangle_distance, segment_triangle_pierce_depth,
)
from ..mesh.simplicial import SimplicialMesh
from ..verdict import ConditionVerdict, HOLDS, FAILS, INCONCLUSIVE, AIB, AIB_LOC, AI

logger = log.getLogger('plinv.checker')

EDGE_TRIM: Final = 1e-3  # share of an edge cut off next to a vertex the two facets have in common
VIOLATION_LIMIT: Final = 32
PUSH_OFF_START: Final = 0.25  # x shortest boundary image edge
PUSH_OFF_ITERS: Final = 8
PUSH_OFF_ACCEPTED: Final = 3
UNFOLD_WEIGHT: Final = 0.5
DEGENERATE_DET: Final = 1e-12  # relative to the largest |det|

_EDGES: Final = {2: ((0, 1),), 3: ((0, 1), (1, 2), (2, 0))}


# ----- exact boundary self-intersection tests -----
@frozen(eq=False)
class BoundaryInjectivity:
    """
    Result of the pairwise test of boundary facet images.

    ``min_separation`` is the smallest distance between the images of two facets without a common vertex
    among the pairs whose boxes overlap (``None`` when there is no such pair).
    """
    injective: bool
    violations: tuple[dict, ...]
    violation_count: int
    pairs_tested: int
    min_separation: Optional[float]
    robust_crossing: Optional[dict]

    def to_dict(self) -> dict:
        return {
            'injective': self.injective,
            'violations': list(self.violations),
            'violation_count': self.violation_count,
            'pairs_tested': self.pairs_tested,
            'min_separation': self.min_separation,
            'robust_crossing': self.robust_crossing,
        }


def _facet_extent(points: np.ndarray) -> np.ndarray:
    """Length of image segments (2D) or twice the area of image triangles (3D)."""
    if points.shape[1] == 2:
        return np.linalg.norm(points[:, 1] - points[:, 0], axis=1)
    return np.linalg.norm(np.cross(points[:, 1] - points[:, 0], points[:, 2] - points[:, 0]), axis=1)


def _facet_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 2:
        return segment_segment_distance(a[:, 0], a[:, 1], b[:, 0], b[:, 1])
    return triangle_triangle_distance(a, b)


def _crossing_depth(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 2:
        return proper_crossing_depth_2d(a[:, 0], a[:, 1], b[:, 0], b[:, 1])
    depth = np.zeros(a.shape[0])
    for u, w in _EDGES[3]:
        depth = np.maximum(depth, segment_triangle_pierce_depth(a[:, u], a[:, w], b))
        depth = np.maximum(depth, segment_triangle_pierce_depth(b[:, u], b[:, w], a))
    return depth


def _adjacent_overlap(fa: np.ndarray, pa: np.ndarray, fb: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """
    Smallest distance from the edges of facet ``a`` to facet ``b`` once the parts next to common vertices
    are trimmed. Facets meeting only in common vertices and edges keep a positive value.
    """
    d = pa.shape[2]
    shared = np.any(fa[:, :, None] == fb[:, None, :], axis=2)
    out = np.full(fa.shape[0], np.inf)
    for u, w in _EDGES[d]:
        a, b = pa[:, u], pa[:, w]
        sa, sb = shared[:, u], shared[:, w]
        a2 = np.where(sa[:, None], a + EDGE_TRIM * (b - a), a)
        b2 = np.where(sb[:, None], b + EDGE_TRIM * (a - b), b)
        if d == 2:
            dist = segment_segment_distance(a2, b2, pb[:, 0], pb[:, 1])
        else:
            dist = segment_triangle_distance(a2, b2, pb)
        out = np.minimum(out, np.where(sa & sb, np.inf, dist))
    return out


def boundary_injectivity(mesh: SimplicialMesh, images: np.ndarray, tol: float,
                         robust: Optional[float] = None) -> BoundaryInjectivity:
    """
    Test whether the PL boundary map is injective.

    Facet images without a common vertex must stay more than ``tol`` apart; facet images with common
    vertices may meet only there (segment-segment tests in 2D, triangle-triangle tests in 3D).
    A crossing deeper than ``robust`` survives every perturbation smaller than its depth.
    """
    facets = mesh.boundary_facets
    points = np.asarray(images, dtype=float)[facets]
    robust = np.inf if robust is None else robust
    violations = []

    for f in np.flatnonzero(_facet_extent(points) <= tol):
        violations.append({'facets': [int(f)], 'kind': 'collapsed', 'distance': 0.0})

    lo, hi = bounding_boxes(points, pad=tol)
    pairs = overlapping_box_pairs(lo, hi)
    i, j = pairs[:, 0], pairs[:, 1]
    common = np.any(facets[i][:, :, None] == facets[j][:, None, :], axis=(1, 2))

    separate = ~common
    dist = depth = np.zeros(0)
    if np.any(separate):
        dist = _facet_distance(points[i[separate]], points[j[separate]])
        depth = _crossing_depth(points[i[separate]], points[j[separate]])
    crossing = None
    for k in np.flatnonzero(dist <= tol):
        pair = [int(i[separate][k]), int(j[separate][k])]
        violations.append({'facets': pair, 'kind': 'intersection', 'distance': float(dist[k]),
                           'crossing_depth': float(depth[k])})
        if depth[k] > robust and (crossing is None or depth[k] > crossing['crossing_depth']):
            crossing = {'facets': pair, 'crossing_depth': float(depth[k]),
                        'images': [points[pair[0]], points[pair[1]]]}

    adj = np.flatnonzero(common)
    if adj.size:
        a, b = i[adj], j[adj]
        gap = np.minimum(_adjacent_overlap(facets[a], points[a], facets[b], points[b]),
                         _adjacent_overlap(facets[b], points[b], facets[a], points[a]))
        for k in np.flatnonzero(gap <= tol):
            violations.append({'facets': [int(a[k]), int(b[k])], 'kind': 'adjacent-overlap',
                               'distance': float(gap[k])})

    return BoundaryInjectivity(
        injective=not violations,
        violations=tuple(violations[:VIOLATION_LIMIT]),
        violation_count=len(violations),
        pairs_tested=int(pairs.shape[0]),
        min_separation=float(dist.min()) if dist.size else None,
        robust_crossing=crossing,
    )


# ----- AIB -----
@frozen(eq=False)
class AIBCertificate:
    """
    Injective boundary maps converging to the boundary trace.

    ``approximants[k]`` holds the images of ``boundary_vertices``; the boundary maps are their PL
    interpolants, so ``sup_distances[k]`` is the largest vertex displacement.
    """
    boundary_vertices: np.ndarray
    approximants: tuple[np.ndarray, ...]
    sup_distances: tuple[float, ...]
    injectivity_proofs: tuple[dict, ...]
    method: str
    sign: int = 0

    @property
    def is_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.sup_distances, self.sup_distances[1:]))

    def to_dict(self) -> dict:
        return {
            'method': self.method,
            'sign': self.sign,
            'boundary_vertices': self.boundary_vertices,
            'sup_distances': list(self.sup_distances),
            'injectivity_proofs': list(self.injectivity_proofs),
            'approximants': list(self.approximants),
        }


def _proof(test: BoundaryInjectivity) -> dict:
    return {'pairs_tested': test.pairs_tested, 'min_separation': test.min_separation}


def boundary_normals(pmap: PLMap) -> np.ndarray:
    """Per-vertex unit average of the outward image normals of the adjacent boundary facets (area weighted)."""
    mesh = pmap.mesh
    points = pmap.boundary_image_points
    if pmap.dim == 2:
        edge = points[:, 1] - points[:, 0]
        area_vectors = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
    else:
        area_vectors = 0.5 * np.cross(points[:, 1] - points[:, 0], points[:, 2] - points[:, 0])
    area_vectors *= np.sign(pmap.determinants[mesh.boundary_owners])[:, None]
    normals = np.zeros_like(pmap.images)
    for k in range(pmap.dim):
        np.add.at(normals, mesh.boundary_facets[:, k], area_vectors)
    norm = np.linalg.norm(normals, axis=1)
    return np.where(norm[:, None] > 0, normals / np.maximum(norm, 1e-300)[:, None], 0.0)


def unfold_directions(pmap: PLMap) -> np.ndarray:
    """
    Spread boundary vertices whose images were collapsed together along boundary edges.

    Each cluster of such vertices moves along its domain offsets from the cluster mean, scaled to unit length.
    """
    mesh = pmap.mesh
    out = np.zeros_like(pmap.images)
    facets = mesh.boundary_facets
    rows, cols = [], []
    for u, w in _EDGES[pmap.dim]:
        a, b = facets[:, u], facets[:, w]
        short = np.linalg.norm(pmap.images[a] - pmap.images[b], axis=1) <= pmap.tau_geom
        rows.append(a[short])
        cols.append(b[short])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    if rows.size == 0:
        return out
    graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(mesh.vertex_count, mesh.vertex_count))
    _, labels = connected_components(graph, directed=False)
    for label in np.unique(labels[rows]):
        members = np.flatnonzero(labels == label)
        offsets = mesh.vertices[members] - mesh.vertices[members].mean(axis=0)
        scale = float(np.linalg.norm(offsets, axis=1).max())
        if scale > 0:
            out[members] = offsets / scale
    return out


def check_AIB(pmap: PLMap, max_iters: int = PUSH_OFF_ITERS,
              accepted_needed: int = PUSH_OFF_ACCEPTED) -> tuple[ConditionVerdict, Optional[AIBCertificate]]:
    """
    Step 1: an injective boundary trace is its own approximating sequence.
    Step 2: push boundary vertex images by ``eps_k = eps_0 / 2^k`` along the averaged image normals (sign chosen
    by fewer intersecting facet pairs), spreading collapsed boundary edges, and accept the injective ones.

    A robust transversal crossing of two facet images makes the condition fail; an unresolved push-off
    ends Inconclusive.
    """
    mesh = pmap.mesh
    bv = np.unique(mesh.boundary_facets)
    tol = pmap.tau_geom
    resolution_record = {'max_iters': max_iters, 'accepted_needed': accepted_needed, 'tolerance': tol}
    trace = boundary_injectivity(mesh, pmap.images, tol, robust=pmap.tau_deg)
    if trace.injective:
        cert = AIBCertificate(boundary_vertices=bv, approximants=(pmap.images[bv],), sup_distances=(0.0,),
                              injectivity_proofs=(_proof(trace),), method='trace')
        return ConditionVerdict(AIB, HOLDS, {'method': 'trace', 'certificate': cert.to_dict()},
                                resolution_record), cert
    if trace.robust_crossing is not None:
        return ConditionVerdict(AIB, FAILS, {'method': 'robust-crossing', 'witness': trace.robust_crossing,
                                             'violation_count': trace.violation_count}, resolution_record), None

    edges = np.concatenate([np.linalg.norm(pmap.images[mesh.boundary_facets[:, w]]
                                           - pmap.images[mesh.boundary_facets[:, u]], axis=1)
                            for u, w in _EDGES[pmap.dim]])
    edges = edges[edges > tol]
    if edges.size == 0:
        return ConditionVerdict(AIB, INCONCLUSIVE, {'reason': 'the boundary image is a point'},
                                resolution_record), None
    eps0 = PUSH_OFF_START * float(edges.min())
    normals = boundary_normals(pmap)
    unfold = UNFOLD_WEIGHT * unfold_directions(pmap)

    def trial(sign: int, eps: float) -> tuple[np.ndarray, BoundaryInjectivity]:
        phi = pmap.images.copy()
        phi[bv] += eps * (sign * normals[bv] + unfold[bv])
        return phi, boundary_injectivity(mesh, phi, tol)

    first = {sign: trial(sign, eps0) for sign in (1, -1)}
    sign = 1 if first[1][1].violation_count <= first[-1][1].violation_count else -1
    resolution_record.update(eps0=eps0, sign=sign)

    approximants, sups, proofs, counts = [], [], [], []
    for k in range(max_iters):
        eps = eps0 / 2 ** k
        phi, test = first[sign] if k == 0 else trial(sign, eps)
        counts.append(test.violation_count)
        if not test.injective:
            continue
        approximants.append(phi[bv])
        sups.append(float(np.linalg.norm(phi[bv] - pmap.images[bv], axis=1).max()))
        proofs.append(dict(_proof(test), k=k, eps=eps))
        if len(approximants) >= accepted_needed:
            cert = AIBCertificate(boundary_vertices=bv, approximants=tuple(approximants), sup_distances=tuple(sups),
                                  injectivity_proofs=tuple(proofs), method='push-off', sign=sign)
            logger.debug(f'AIB push-off accepted at eps {[p["eps"] for p in proofs]}')
            return ConditionVerdict(AIB, HOLDS, {'method': 'push-off', 'certificate': cert.to_dict(),
                                                 'trace_violations': trace.violation_count},
                                    resolution_record), cert
    return ConditionVerdict(AIB, INCONCLUSIVE, {
        'method': 'push-off',
        'violation_counts': counts,
        'accepted': len(approximants),
        'trace_violations': list(trace.violations),
    }, resolution_record), None


def check_AIB_loc(pmap: PLMap, covering: InnerCovering, max_iters: int = PUSH_OFF_ITERS) -> ConditionVerdict:
    """:func:`check_AIB` on the restriction of the map to every covering level."""
    results = gather_in_pool((check_AIB, (pmap.restrict(level), max_iters), {}) for level in covering.levels)
    verdicts = [verdict for verdict, _ in results]
    resolution_record = {'levels': len(covering), 'max_iters': max_iters}
    for m, verdict in enumerate(verdicts):
        if verdict.fails:
            return ConditionVerdict(AIB_LOC, FAILS, dict(verdict.evidence, level=m), resolution_record)
    if all(v.holds for v in verdicts):
        return ConditionVerdict(AIB_LOC, HOLDS, {'methods': [v.evidence['method'] for v in verdicts]},
                                resolution_record)
    return ConditionVerdict(AIB_LOC, INCONCLUSIVE, {'verdicts': [v.verdict for v in verdicts]}, resolution_record)


# ----- AI -----
def _orientation_flip(pmap: PLMap, signs: np.ndarray) -> Optional[list[int]]:
    adjacency = pmap.mesh.adjacency
    s, j = np.nonzero(adjacency >= 0)
    t = adjacency[s, j]
    flip = np.flatnonzero(signs[s] != signs[t])
    return None if flip.size == 0 else [int(s[flip[0]]), int(t[flip[0]])]


def check_AI(pmap: PLMap, resolution: Optional[int] = None) -> ConditionVerdict:
    """
    Injectivity on the closed domain.

    A PL map with an injective boundary and one strict orientation on all simplices is injective exactly
    when its degree never exceeds one in absolute value. A degenerate simplex, an orientation flip across a
    shared facet or a non-injective boundary are definite witnesses against it.
    """
    dets = pmap.determinants
    scale = float(np.abs(dets).max()) if dets.size else 0.0
    degenerate = np.flatnonzero(np.abs(dets) <= DEGENERATE_DET * max(scale, 1e-300))
    if degenerate.size:
        s = int(degenerate[0])
        _, _, vt = np.linalg.svd(pmap.gradients[s])
        return ConditionVerdict(AI, FAILS, {'reason': 'degenerate simplex', 'simplex': s,
                                            'kernel_direction': vt[-1]})
    signs = np.sign(dets).astype(np.int64)
    flip = _orientation_flip(pmap, signs)
    if flip is not None:
        return ConditionVerdict(AI, FAILS, {'reason': 'orientation flips across a shared facet', 'simplices': flip})
    trace = boundary_injectivity(pmap.mesh, pmap.images, pmap.tau_geom)
    if not trace.injective:
        return ConditionVerdict(AI, FAILS, {'reason': 'boundary not injective', 'violations': list(trace.violations)})
    report = degree_field(pmap, None, resolution)
    worst = max(report.regions, key=lambda r: (abs(r.degree), -r.label))
    resolution_record = report.grid.resolution_record
    if abs(worst.degree) > 1:
        return ConditionVerdict(AI, FAILS, {'reason': 'multiple cover', 'value': worst.representatives[0],
                                            'degree': worst.degree}, resolution_record)
    return ConditionVerdict(AI, HOLDS, {'orientation': int(signs[0]), 'sigma': report.sigma}, resolution_record)
