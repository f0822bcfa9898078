"""
Three independent ways to compute the Brouwer degree of a piecewise-affine map.

* ``degree_regular_sum``: signed count of exact preimages of a regular value;
* ``degree_boundary``: winding number (2D) or solid-angle sum (3D) of the oriented boundary image;
* ``degree_integral``: quadrature of a normalised bump composed with the map, weighted by the Jacobian.

``A`` is always an optional submesh of the map's domain; ``None`` means the whole domain.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import math
import numpy as np
from attrs import frozen, field

from .. import log
from ..errors_collection import NotRegularValue, OnImageBoundary, NumericallyAmbiguous, SupportCrossesImageBoundary
from ..mesh.geometry import simplex_distance, barycentric, distance_to_hull_union, signed_volumes
from ..mesh.simplicial import SimplicialMesh
from .plmap import PLMap
from .quadrature import quadrature_points, refine

logger = log.getLogger('plinv.degree')

ROUNDING_GUARD: Final = 0.25
MOLLIFIER_CELLS: Final = {2: 16, 3: 8}  # leaves are refined below radius / cells
ADAPTIVE_LEVELS: Final = 2
_WINDING_CHUNK: Final = 2_000_000


def _point(z, d: int) -> np.ndarray:
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != d:
        raise ValueError(f'query point must have {d} coordinates')
    return z


def boundary_distance(pmap: PLMap, z) -> float:
    """Distance from ``z`` to the image of the domain boundary."""
    return float(distance_to_hull_union(pmap.boundary_image_points, _point(z, pmap.dim)[None])[0])


def require_off_boundary(pmap: PLMap, z) -> float:
    dist = boundary_distance(pmap, z)
    if dist <= pmap.tau_deg:
        raise OnImageBoundary(z, dist, pmap.tau_deg)
    return dist


# ----- preimage enumeration -----
@frozen(eq=False)
class Preimages:
    """
    Simplices whose closed image hull contains a value.

    Degenerate simplices (image volume below tolerance) have NaN points and sign 0.
    """
    value: np.ndarray
    simplices: np.ndarray
    points: np.ndarray
    barycentric: np.ndarray
    signs: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.signs == 0

    @property
    def count(self) -> int:
        return int(self.simplices.size)

    @property
    def signed_count(self) -> int:
        return int(self.signs.sum())


def preimages(pmap: PLMap, z, tol: Optional[float] = None) -> Preimages:
    z = _point(z, pmap.dim)
    tol = pmap.tau_geom if tol is None else tol
    img = pmap.image_points
    inside_box = np.all((img.min(axis=1) - tol <= z) & (z <= img.max(axis=1) + tol), axis=1)
    candidates = np.flatnonzero(inside_box)
    hits = candidates[simplex_distance(img[candidates], z) <= tol] if candidates.size else candidates
    d = pmap.dim
    points = np.full((hits.size, d), np.nan)
    bary = np.full((hits.size, d + 1), np.nan)
    signs = np.zeros(hits.size, dtype=np.int64)
    regular = np.abs(pmap.image_volumes[hits]) > pmap.tau_vol
    if np.any(regular):
        lam = barycentric(img[hits[regular]], z)
        bary[regular] = lam
        points[regular] = np.einsum('ki,kid->kd', lam, pmap.mesh.vertices[pmap.mesh.simplices[hits[regular]]])
        signs[regular] = np.sign(pmap.determinants[hits[regular]]).astype(np.int64)
    return Preimages(value=z, simplices=hits, points=points, barycentric=bary, signs=signs)


def degree_regular_sum(pmap: PLMap, A: Optional[SimplicialMesh], z) -> int:
    """
    Sum of ``sign(det)`` over the exact preimages of a regular value.

    :raise OnImageBoundary: ``z`` is within the degree tolerance of the boundary image
    :raise NotRegularValue: ``z`` is close to an image facet or covered by a degenerate simplex image
    """
    local = pmap.restrict(A)
    z = _point(z, local.dim)
    require_off_boundary(local, z)
    found = preimages(local, z)
    if np.any(found.degenerate):
        raise NotRegularValue(z, 'a degenerate simplex image contains it')
    if found.count:
        img = local.image_points[found.simplices]
        facet_dist = min(float(simplex_distance(np.delete(img, j, axis=1), z).min()) for j in range(local.dim + 1))
        if facet_dist <= local.tau_geom:
            raise NotRegularValue(z, f'it is {facet_dist:.3e} away from an image facet')
    return found.signed_count


# ----- boundary algorithm -----
def winding_numbers(pmap: PLMap, A: Optional[SimplicialMesh], points: np.ndarray) -> np.ndarray:
    """
    Unrounded winding numbers (2D) or normalised solid-angle sums (3D) of the boundary image at many points.
    """
    local = pmap.restrict(A)
    facets = local.boundary_image_points
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(points.shape[0])
    chunk = max(1, _WINDING_CHUNK // max(facets.shape[0], 1))
    for start in range(0, points.shape[0], chunk):
        rel = facets[None, :, :, :] - points[start:start + chunk, None, None, :]
        if local.dim == 2:
            a, b = rel[..., 0, :], rel[..., 1, :]
            cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
            dot = np.einsum('qfd,qfd->qf', a, b)
            out[start:start + chunk] = np.arctan2(cross, dot).sum(axis=1) / (2 * math.pi)
        else:
            a, b, c = rel[..., 0, :], rel[..., 1, :], rel[..., 2, :]
            la, lb, lc = (np.linalg.norm(v, axis=-1) for v in (a, b, c))
            numerator = np.einsum('qfd,qfd->qf', a, np.cross(b, c))
            denominator = (la * lb * lc + np.einsum('qfd,qfd->qf', a, b) * lc
                           + np.einsum('qfd,qfd->qf', a, c) * lb + np.einsum('qfd,qfd->qf', b, c) * la)
            out[start:start + chunk] = 2 * np.arctan2(numerator, denominator).sum(axis=1) / (4 * math.pi)
    return out


def round_winding(z, value: float) -> int:
    nearest = round(value)
    if abs(value - nearest) >= ROUNDING_GUARD:
        raise NumericallyAmbiguous(z, value)
    return int(nearest)


def degree_boundary(pmap: PLMap, A: Optional[SimplicialMesh], z) -> int:
    """
    Degree from the oriented boundary image alone.

    :raise OnImageBoundary: ``z`` is within the degree tolerance of the boundary image
    :raise NumericallyAmbiguous: the winding sum is not within the rounding guard of an integer
    """
    local = pmap.restrict(A)
    z = _point(z, local.dim)
    require_off_boundary(local, z)
    return round_winding(z, float(winding_numbers(local, None, z[None])[0]))


# ----- integral representation -----
@frozen
class MollifierSpec:
    """Radial hat function ``(1 - |u - center| / radius)_+`` scaled to unit integral."""
    center: np.ndarray = field(converter=lambda c: np.asarray(c, dtype=float))
    radius: float = field(converter=float)

    def normalization(self, d: int) -> float:
        # the hat integrates to pi R^d / 3 in both two and three dimensions
        return 3.0 / (math.pi * self.radius ** d)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        d = points.shape[-1]
        r = np.linalg.norm(points - self.center, axis=-1)
        return self.normalization(d) * np.clip(1.0 - r / self.radius, 0.0, None)


def _leaf_geometry(leaves: np.ndarray, d: int, center: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    img = leaves[:, :, d:2 * d]
    dist = np.linalg.norm(img - center, axis=2)
    edges = img[:, :, None, :] - img[:, None, :, :]
    diam = np.linalg.norm(edges, axis=3).max(axis=(1, 2))
    return dist.min(axis=1), dist.max(axis=1), diam


def degree_integral(pmap: PLMap, A: Optional[SimplicialMesh], z, h: Optional[MollifierSpec] = None) -> float:
    """
    Quadrature value of ``int_A h(y(x)) det(grad y(x)) dx``.

    Simplices meeting the support are refined until image cells are below ``radius / 16`` (2D) or
    ``radius / 8`` (3D), then twice more where the support sphere cuts a cell. Degree-4 rules on the leaves.
    Without ``h`` the bump is centred at ``z`` with half its clearance from the boundary image as radius.

    :raise SupportCrossesImageBoundary: the support ball does not stay in the region of ``z``
    """
    local = pmap.restrict(A)
    d = local.dim
    z = _point(z, d)
    clearance_z = require_off_boundary(local, z)
    if h is None:
        h = MollifierSpec(center=z, radius=0.5 * clearance_z)
    clearance = boundary_distance(local, h.center)
    if clearance <= h.radius + float(np.linalg.norm(z - h.center)):
        raise SupportCrossesImageBoundary(h.center, h.radius, clearance)

    img = local.image_points
    near = simplex_distance(img, h.center) < h.radius
    near &= np.abs(local.image_volumes) > local.tau_vol
    sel = np.flatnonzero(near)
    if sel.size == 0:
        return 0.0
    dom = local.mesh.vertices[local.mesh.simplices[sel]]
    det = np.broadcast_to(local.determinants[sel][:, None, None], (sel.size, d + 1, 1))
    leaves = np.concatenate([dom, img[sel], det], axis=2)

    target = h.radius / MOLLIFIER_CELLS[d]
    done = []
    while leaves.shape[0]:
        lo, _, diam = _leaf_geometry(leaves, d, h.center)
        alive = lo < h.radius + diam  # conservative: the hull may dip below its vertex distances
        leaves, diam = leaves[alive], diam[alive]
        fine = diam <= target
        done.append(leaves[fine])
        leaves = refine(leaves[~fine]) if np.any(~fine) else leaves[:0]
    leaves = np.concatenate(done)

    for _ in range(ADAPTIVE_LEVELS):
        lo, hi, diam = _leaf_geometry(leaves, d, h.center)
        cut = ((lo < h.radius) & (hi > h.radius)) | (lo < diam)
        if not np.any(cut):
            break
        leaves = np.concatenate([leaves[~cut], refine(leaves[cut])])

    nodes, weights = quadrature_points(leaves)
    values = h(nodes[..., d:2 * d]) * nodes[..., 2 * d]
    volumes = np.abs(signed_volumes(leaves[:, :, :d]))
    return float(np.sum(volumes * (values @ weights)))
