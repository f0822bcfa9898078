"""
Reduced domain, strict orientation preservation and the restriction identity.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np
from attrs import frozen
from scipy.sparse.csgraph import connected_components

from .. import log
from ..degree import PLMap, degree_field, degree_boundary, boundary_distance, preimages
from ..errors_collection import QueryErrors, InconsistentRegion, MalformedInput
from ..mesh.covering import boundary_distances
from ..mesh.geometry import simplex_distance
from ..mesh.simplicial import SimplicialMesh, submesh, simplex_graph
from ..verdict import ConditionVerdict, HOLDS, FAILS, INCONCLUSIVE, STRICT_ORIENTATION, RESTRICTION

logger = log.getLogger('plinv.topology')

STRICT_CENTERS: Final = 20
STRICT_RADII: Final = (0.5, 0.25, 0.125)  # x distance of the centre to the boundary
STRICT_RESOLUTION: Final = 64
RESTRICT_SAMPLES: Final = 64


@frozen(eq=False)
class ReducedDomain:
    """
    Vertex and simplex classification of the reduced domain.

    An interior vertex belongs to it when the preimage piece of its own image does not reach the boundary;
    a simplex when none of its interior vertices is excluded.
    """
    vertex_mask: np.ndarray
    simplex_mask: np.ndarray
    submesh: Optional[SimplicialMesh]
    boundary_touching_values: np.ndarray
    strictness: ConditionVerdict

    @property
    def is_everything(self) -> bool:
        return bool(np.all(self.simplex_mask))

    @property
    def excluded_simplices(self) -> np.ndarray:
        return np.flatnonzero(~self.simplex_mask)

    def to_dict(self) -> dict:
        return {
            'vertices': np.flatnonzero(self.vertex_mask),
            'simplices': np.flatnonzero(self.simplex_mask),
            'excluded_simplices': self.excluded_simplices,
            'boundary_touching_values': self.boundary_touching_values,
            'strictness': self.strictness.to_dict(),
        }


def _touching_vertex(local: PLMap, vertex: int, star: np.ndarray, tol: float) -> bool:
    mesh = local.mesh
    z = local.images[vertex]
    img = local.image_points
    box = np.all((img.min(axis=1) - tol <= z) & (z <= img.max(axis=1) + tol), axis=1)
    candidates = np.flatnonzero(box)
    hits = candidates[simplex_distance(img[candidates], z) <= tol]
    facet_near = np.flatnonzero(simplex_distance(local.boundary_image_points, z) <= tol)
    if facet_near.size == 0:
        return False
    graph = simplex_graph(mesh).tocsr()[hits][:, hits]
    _, labels = connected_components(graph, directed=False)
    own = set(labels[np.isin(hits, star)].tolist())
    piece = hits[np.isin(labels, list(own))]
    return bool(np.intersect1d(piece, mesh.boundary_owners[facet_near]).size)


def reduced_domain(pmap: PLMap, U: Optional[SimplicialMesh] = None, tol: Optional[float] = None) -> ReducedDomain:
    """
    Classify the vertices of ``U``: a vertex is kept iff the preimage piece of its image (at the degree
    tolerance) does not contain a boundary facet mapped onto that image. Boundary vertices are never kept.
    """
    local = pmap.restrict(U)
    mesh = local.mesh
    tol = local.tau_deg if tol is None else tol
    strictness = check_strictly_orientation_preserving(local)
    if not strictness.holds:
        logger.warning(f'Reduced domain requested for a map that is not strictly orientation preserving '
                       f'({strictness.verdict})')

    stars = mesh.vertex_stars()
    boundary = mesh.boundary_vertex_mask
    keep = ~boundary
    touching_values = []
    for v in np.flatnonzero(boundary_preimage_mask(local, tol)):
        if _touching_vertex(local, int(v), stars[v], tol):
            keep[v] = False
            touching_values.append(local.images[v])

    excluded = ~keep & ~boundary
    simplex_mask = ~np.any(excluded[mesh.simplices], axis=1)
    sub = submesh(mesh, np.flatnonzero(simplex_mask)) if np.any(simplex_mask) else None
    if sub is not None and sub.simplex_count == mesh.simplex_count:
        sub = mesh
    return ReducedDomain(vertex_mask=keep, simplex_mask=simplex_mask, submesh=sub,
                         boundary_touching_values=np.array(touching_values).reshape(-1, mesh.dim),
                         strictness=strictness)


def boundary_preimage_mask(pmap: PLMap, tol: Optional[float] = None) -> np.ndarray:
    """Interior vertices whose image lies on the image of the boundary."""
    tol = pmap.tau_deg if tol is None else tol
    facets = pmap.boundary_image_points
    out = np.zeros(pmap.mesh.vertex_count, dtype=bool)
    for v in np.flatnonzero(~pmap.mesh.boundary_vertex_mask):
        out[v] = bool(np.any(simplex_distance(facets, pmap.images[v]) <= tol))
    return out


# ----- strict orientation preservation -----
def _strict_centers(pmap: PLMap, count: int, rng: np.random.Generator) -> np.ndarray:
    mesh = pmap.mesh
    bad = pmap.determinants <= 0
    stars = mesh.vertex_stars()
    share = np.array([bad[s].mean() if s.size else 0.0 for s in stars])
    suspects = [int(v) for v in np.lexsort((np.arange(mesh.vertex_count), -share)) if share[v] > 0]
    centers = suspects[:count]
    rest = np.setdiff1d(np.flatnonzero(~mesh.boundary_vertex_mask), centers)
    if len(centers) < count and rest.size:
        centers += rng.choice(rest, size=min(count - len(centers), rest.size), replace=False).tolist()
    return np.array(centers, dtype=np.int64)


def check_strictly_orientation_preserving(pmap: PLMap, seed: int = 0, centers: int = STRICT_CENTERS,
                                          resolution: int = STRICT_RESOLUTION) -> ConditionVerdict:
    """
    Positive determinants everywhere decide at once. Otherwise sample balls around vertices (those whose
    star has non-positive determinants first) and require a nonnegative degree everywhere and some region
    of nonzero degree in every ball.
    """
    resolution_record = {'seed': seed, 'centers': centers, 'radii': list(STRICT_RADII), 'grid_resolution': resolution}
    if pmap.is_orientation_preserving:
        return ConditionVerdict(STRICT_ORIENTATION, HOLDS, evidence={'method': 'determinants'},
                                resolution=resolution_record)
    mesh = pmap.mesh
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5107]))
    chosen = _strict_centers(pmap, centers, rng)
    rho = boundary_distances(mesh)
    edge = float(np.median(np.linalg.norm(mesh.simplex_points[:, 1] - mesh.simplex_points[:, 0], axis=1)))
    centroids = mesh.centroids
    stars = mesh.vertex_stars()
    skipped = 0
    for v in chosen:
        scale = max(float(rho[v]), edge)
        for factor in STRICT_RADII:
            radius = factor * scale
            ball_ids = np.flatnonzero(np.linalg.norm(centroids - mesh.vertices[v], axis=1) < radius)
            if ball_ids.size == 0:
                ball_ids = stars[v]
            ball = submesh(mesh, ball_ids)
            try:
                report = degree_field(pmap, ball, resolution)
            except QueryErrors + (InconsistentRegion,):
                skipped += 1
                continue
            degrees = [r.degree for r in report.regions]
            witness = {'center': mesh.vertices[v], 'radius': radius, 'degrees': sorted(set(degrees))}
            if min(degrees) < 0:
                return ConditionVerdict(STRICT_ORIENTATION, FAILS, dict(witness, reason='negative degree',
                                                                        method='sampled'), resolution_record)
            if not any(degrees):
                return ConditionVerdict(STRICT_ORIENTATION, FAILS, dict(witness, reason='no nonzero degree',
                                                                        method='sampled'), resolution_record)
    return ConditionVerdict(STRICT_ORIENTATION, HOLDS, {'method': 'sampled', 'skipped_balls': skipped},
                            resolution_record)


# ----- restriction identity -----
def _image_diameters(pmap: PLMap) -> np.ndarray:
    img = pmap.image_points
    return np.linalg.norm(img[:, :, None, :] - img[:, None, :, :], axis=-1).max(axis=(1, 2))


def restrict_check(pmap: PLMap, U: Optional[SimplicialMesh] = None, samples: int = RESTRICT_SAMPLES,
                   seed: int = 0, reduced: Optional[ReducedDomain] = None) -> ConditionVerdict:
    """
    Compare the degree on ``U`` with the degree on its reduced domain at sampled values off both boundary
    images, values covered by excluded simplices included.

    Every vertex of an excluded simplex maps onto the image of ``dU`` or of the reduced boundary, so a value
    covered by an excluded simplex is only skipped when it lies within that simplex's image diameter of
    those two boundary images. A reduced domain that drops simplices mapped away from them fails.
    """
    local = pmap.restrict(U)
    reduced = reduced_domain(local) if reduced is None else reduced
    resolution_record = {'seed': seed, 'samples': samples}
    if reduced.submesh is None:
        raise MalformedInput('reduced domain', 'it is empty')
    if reduced.submesh is local.mesh:
        return ConditionVerdict(RESTRICTION, HOLDS, {'trivial': True, 'strictness': reduced.strictness.verdict},
                                resolution_record)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x4e57]))
    report = degree_field(local)
    candidates = [p for r in report.regions for p in r.representatives]
    lo, hi = local.image_bbox
    candidates += list(rng.uniform(lo, hi, size=(samples, local.dim)))
    inner = local.restrict(reduced.submesh)
    excluded = local.restrict(submesh(local.mesh, reduced.excluded_simplices)) if reduced.excluded_simplices.size \
        else None
    diameters = _image_diameters(excluded) if excluded is not None else None

    compared = skipped = 0
    for z in candidates:
        if excluded is not None:
            covering = preimages(excluded, z, tol=local.tau_deg).simplices
            if covering.size:
                band = float(diameters[covering].max())
                if min(boundary_distance(local, z), boundary_distance(inner, z)) <= band:
                    skipped += 1
                    continue
        try:
            full = degree_boundary(local, None, z)
            part = degree_boundary(inner, None, z)
        except QueryErrors:
            skipped += 1
            continue
        compared += 1
        if full != part:
            return ConditionVerdict(RESTRICTION, FAILS, {'value': z, 'degree_U': full, 'degree_reduced': part},
                                    resolution_record)
    verdict = HOLDS if compared else INCONCLUSIVE
    return ConditionVerdict(RESTRICTION, verdict, {'compared': compared, 'skipped': skipped,
                                                   'strictness': reduced.strictness.verdict}, resolution_record)
