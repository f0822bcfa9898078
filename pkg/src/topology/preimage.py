"""
Connected pieces of approximate preimages and their isolation by small submeshes.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np
from attrs import frozen
from scipy.sparse.csgraph import connected_components

from .. import log
from ..degree import PLMap, preimages, degree_boundary
from ..degree.quadrature import refine
from ..errors_collection import EmptyPreimage, CannotSeparate, BoundaryTouchingPiece, QueryErrors
from ..mesh.geometry import simplex_distance
from ..mesh.simplicial import SimplicialMesh, build_mesh, submesh, simplex_graph

logger = log.getLogger('plinv.topology')

ETA_EDGE_FACTOR: Final = 2.0
SHRINK_STEPS: Final = 12
MAX_REFINEMENTS: Final = 5
CLUSTER_TOLERANCE: Final = 1e-6  # x domain diagonal


@frozen(eq=False)
class PreimagePiece:
    """
    One connected piece of ``{x : |y(x) - z| <= eta}`` as a set of simplices.

    ``exact_points`` are the exact preimages found in the piece (one per covering simplex).
    """
    simplices: np.ndarray
    touches_boundary: bool
    exact_points: np.ndarray

    def clusters(self, tol: float) -> list[np.ndarray]:
        """Exact preimage points grouped by proximity."""
        groups: list[list[np.ndarray]] = []
        for point in self.exact_points:
            for group in groups:
                if np.linalg.norm(group[0] - point) <= tol:
                    group.append(point)
                    break
            else:
                groups.append([point])
        return [np.mean(g, axis=0) for g in groups]

    def to_dict(self) -> dict:
        return {
            'simplices': self.simplices,
            'touches_boundary': self.touches_boundary,
            'exact_points': self.exact_points,
        }


@frozen(eq=False)
class PreimageComponent:
    value: np.ndarray
    eta: float
    pieces: tuple[PreimagePiece, ...]
    vertex_pinched: bool  # two pieces share a vertex but no facet

    @property
    def touching(self) -> tuple[PreimagePiece, ...]:
        return tuple(p for p in self.pieces if p.touches_boundary)

    @property
    def inner(self) -> tuple[PreimagePiece, ...]:
        return tuple(p for p in self.pieces if not p.touches_boundary)

    def to_dict(self) -> dict:
        return {
            'value': self.value,
            'eta': self.eta,
            'pieces': [p.to_dict() for p in self.pieces],
            'vertex_pinched': self.vertex_pinched,
        }


def default_eta(pmap: PLMap, z: np.ndarray, dist: np.ndarray) -> float:
    """Twice the longest image edge among the simplices whose image is (nearly) at ``z``."""
    near = np.flatnonzero(dist <= max(pmap.tau_deg, float(dist.min())))
    img = pmap.image_points[near]
    edges = np.linalg.norm(img[:, :, None, :] - img[:, None, :, :], axis=3)
    return ETA_EDGE_FACTOR * float(edges.max())


def preimage_components(pmap: PLMap, z, eta: Optional[float] = None,
                        U: Optional[SimplicialMesh] = None) -> PreimageComponent:
    """
    Connected pieces (facet adjacency) of the simplices whose image is within ``eta`` of ``z``.

    A piece touches the boundary when one of its boundary facets of ``U`` maps within ``eta`` of ``z``.

    :raise EmptyPreimage: no simplex image within ``eta``
    """
    local = pmap.restrict(U)
    mesh = local.mesh
    z = np.asarray(z, dtype=float)
    dist = simplex_distance(local.image_points, z)
    eta = default_eta(local, z, dist) if eta is None else float(eta)
    selected = np.flatnonzero(dist <= eta)
    if selected.size == 0:
        raise EmptyPreimage(z, eta)

    graph = simplex_graph(mesh).tocsr()[selected][:, selected]
    n_pieces, labels = connected_components(graph, directed=False)

    facet_near = simplex_distance(local.boundary_image_points, z) <= eta
    touching_owners = set(mesh.boundary_owners[facet_near].tolist())

    exact = preimages(local, z)
    exact_lookup = {int(s): p for s, p in zip(exact.simplices, exact.points) if np.all(np.isfinite(p))}

    pieces = []
    for k in range(n_pieces):
        members = selected[labels == k]
        points = [exact_lookup[int(s)] for s in members if int(s) in exact_lookup]
        pieces.append(PreimagePiece(
            simplices=members,
            touches_boundary=bool(touching_owners.intersection(members.tolist())),
            exact_points=np.array(points).reshape(-1, mesh.dim),
        ))
    # pieces ordered by their lowest simplex
    pieces.sort(key=lambda p: int(p.simplices.min()))

    pinched = False
    if len(pieces) > 1:
        vertex_sets = [set(mesh.simplices[p.simplices].ravel().tolist()) for p in pieces]
        pinched = any(vertex_sets[i] & vertex_sets[j]
                      for i in range(len(vertex_sets)) for j in range(i + 1, len(vertex_sets)))
        if pinched:
            logger.debug(f'Preimage pieces of {z} meet at a vertex only; reported separately')
    return PreimageComponent(value=z, eta=eta, pieces=tuple(pieces), vertex_pinched=pinched)


@frozen(eq=False)
class IsolatedComponent:
    """
    A submesh around one preimage piece with positive degree at the value.

    ``slack`` is the largest distance from the submesh to the preimage point, so the boundary of the
    submesh stays within ``slack`` of the piece.
    """
    value: np.ndarray
    submesh: SimplicialMesh
    degree: int
    center: np.ndarray
    radius: float
    slack: float
    n: int

    @property
    def slack_within_bound(self) -> bool:
        return self.slack <= 1.0 / self.n

    def to_dict(self) -> dict:
        return {
            'value': self.value,
            'center': self.center,
            'radius': self.radius,
            'slack': self.slack,
            'n': self.n,
            'degree': self.degree,
            'simplex_count': self.submesh.simplex_count,
            'slack_within_bound': self.slack_within_bound,
        }


def refined_map(pmap: PLMap) -> PLMap:
    """The same map on the uniformly refined mesh, each simplex split into ``2^d`` children."""
    mesh, d = pmap.mesh, pmap.dim
    stacked = np.concatenate([mesh.vertices, pmap.images], axis=1)[mesh.simplices]
    children = refine(stacked).reshape(-1, 2 * d)
    # midpoints are computed symmetrically, so shared vertices coincide exactly
    _, first, inverse = np.unique(children[:, :d], axis=0, return_index=True, return_inverse=True)
    fine = build_mesh(d, children[first, :d], inverse.ravel().reshape(-1, d + 1),
                      require_connected=False, reference_diag=mesh.diag)
    return PLMap.from_images(fine, children[first, d:], image_diag=pmap.image_diag)


def _separating_ball(local: PLMap, center: np.ndarray, z: np.ndarray, n: int):
    mesh = local.mesh
    containing = np.flatnonzero(simplex_distance(mesh.simplex_points, center) <= mesh.tau_geom)
    vertex_dist = np.linalg.norm(mesh.vertices - center, axis=1)
    simplex_reach = vertex_dist[mesh.simplices].max(axis=1)
    radius = 1.0 / n
    for _ in range(SHRINK_STEPS):
        chosen = np.union1d(np.flatnonzero(simplex_reach <= radius), containing)
        ball = submesh(mesh, chosen)
        try:
            degree = degree_boundary(local, ball, z)
        except QueryErrors:
            degree = 0
        other = preimages(local.restrict(ball), z).points
        foreign = np.linalg.norm(other - center, axis=1) > CLUSTER_TOLERANCE * mesh.diag
        if degree >= 1 and not np.any(foreign[np.all(np.isfinite(other), axis=1)]):
            return ball, degree, radius, float(simplex_reach[chosen].max())
        if chosen.size == containing.size:
            break
        radius /= 2
    return None


def isolate_component(pmap: PLMap, piece: PreimagePiece, n: int, z,
                      U: Optional[SimplicialMesh] = None) -> IsolatedComponent:
    """
    Shrink a ball submesh around the preimage point of ``piece`` until it separates it.

    Starts from the simplices whose vertices lie within ``1/n`` of the preimage point and halves the
    radius until the value is off the submesh boundary image and the degree is at least 1; the simplices
    containing the preimage point are always kept. While those simplices reach farther than ``1/n`` the
    map is refined uniformly (at most ``MAX_REFINEMENTS`` times) and the search repeats, so the returned
    submesh may belong to a refined mesh.

    :raise BoundaryTouchingPiece: the piece touches the boundary
    :raise CannotSeparate: the piece holds several distinct preimage points, or no radius works
    """
    if piece.touches_boundary:
        raise BoundaryTouchingPiece(z)
    local = pmap.restrict(U)
    z = np.asarray(z, dtype=float)
    clusters = piece.clusters(CLUSTER_TOLERANCE * local.mesh.diag)
    if not clusters:
        raise CannotSeparate(z, 'the piece contains no exact preimage')
    if len(clusters) > 1:
        raise CannotSeparate(z, f'the piece contains {len(clusters)} distinct preimage points; shrink eta')
    center = clusters[0]

    for level in range(MAX_REFINEMENTS + 1):
        found = _separating_ball(local, center, z, n)
        if found is None:
            raise CannotSeparate(z, 'no ball around the preimage point separates it; refine the mesh')
        ball, degree, radius, slack = found
        if slack <= 1.0 / n or level == MAX_REFINEMENTS:
            break
        local = refined_map(local)
        logger.debug(f'Slack {slack:.3g} exceeds 1/{n}; refined to {local.mesh.simplex_count} simplices')
    return IsolatedComponent(value=z, submesh=ball, degree=degree, center=center,
                             radius=radius, slack=slack, n=n)
