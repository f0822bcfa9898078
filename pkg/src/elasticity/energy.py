"""
Polyconvex stored energies on piecewise-affine deformations confined to a convex box.
"""
from __future__ import annotations
from typing import Any, Optional, Union
from typing_extensions import Final

import math
import numpy as np
from attrs import frozen, field
from scipy.spatial import ConvexHull, QhullError

from .. import log
from ..degree import PLMap, cofactors
from ..errors_collection import InvalidEnergyModel, NonpositiveDeterminant, InfeasibleInitial, MalformedInput
from ..mesh.geometry import closest_points
from ..mesh.simplicial import SimplicialMesh

logger = log.getLogger('plinv.elasticity')

INFINITE: Final = math.inf
FAMILIES: Final = ('W1', 'W2', 'W3')
BOX_TOLERANCE: Final = 1e-9  # x box diagonal
SCALED_TRANSLATE_FILL: Final = 0.5
# best constants of |F|^(d-1) >= c |cof F|, raised to the power d
DISTORTION_CONSTANT: Final = {2: 1.0, 3: 3 * math.sqrt(3)}
DISTORTION_SLACK: Final = 1e-9  # relative


# ----- box -----
@frozen(eq=False)
class Box:
    """Closed convex polytope ``{z : normals @ z + offsets <= 0}`` spanned by ``vertices``."""
    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    facets: np.ndarray

    @classmethod
    def from_vertices(cls, vertices) -> Box:
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] not in (2, 3) or vertices.shape[0] <= vertices.shape[1]:
            raise MalformedInput('box', f'need at least d + 1 points in 2D or 3D, got shape {vertices.shape}')
        try:
            hull = ConvexHull(vertices)
        except QhullError as e:
            raise MalformedInput('box', f'the points span no full-dimensional polytope ({e.__class__.__name__})')
        corners = vertices[hull.vertices]
        return cls(vertices=corners, normals=hull.equations[:, :-1], offsets=hull.equations[:, -1],
                   facets=vertices[hull.simplices])

    @classmethod
    def rectangle(cls, lo, hi) -> Box:
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing='ij')).reshape(lo.size, -1).T
        return cls.from_vertices(corners)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def diag(self) -> float:
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    @property
    def tolerance(self) -> float:
        return BOX_TOLERANCE * self.diag

    def excess(self, points: np.ndarray) -> np.ndarray:
        """Largest facet violation per point; non-positive inside."""
        return (np.atleast_2d(points) @ self.normals.T + self.offsets).max(axis=1)

    def contains(self, points: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
        return self.excess(points) <= (self.tolerance if tol is None else tol)

    def project(self, points: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the closed box."""
        points = np.array(points, dtype=float)
        for k in np.flatnonzero(self.excess(points) > 0):
            candidates = closest_points(self.facets, points[k])
            points[k] = candidates[np.argmin(np.linalg.norm(candidates - points[k], axis=1))]
        return points

    def to_dict(self) -> dict:
        return {'vertices': self.vertices}


# ----- model -----
def _forces(value) -> Optional[np.ndarray]:
    if value is None:
        return None
    forces = np.asarray(value, dtype=float)
    return None if not np.any(forces) else forces


def _box(value) -> Optional[Box]:
    if value is None or isinstance(value, Box):
        return value
    return Box.from_vertices(value)


@frozen(eq=False)
class EnergyModel:
    """
    ``W1 = |F|^p + det^-r``, ``W2 = W1 + |cof F|^s``, ``W3 = W2 + |F|^6 / det^2`` with Frobenius norms,
    infinite on ``det F <= 0``.

    ``g`` is a constant body force ``(d,)`` or one force per vertex ``(n, d)``.
    """
    family: str = field()
    p: float = field(converter=float)
    r: float = field(converter=float)
    s: Optional[float] = field(default=None, converter=lambda v: None if v is None else float(v))
    c: float = field(default=1.0, converter=float)
    q: Optional[float] = field(default=None, converter=lambda v: None if v is None else float(v))
    g: Optional[np.ndarray] = field(default=None, converter=_forces)
    box: Optional[Box] = field(default=None, converter=_box)

    def __attrs_post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidEnergyModel('family', self.family, f'one of {FAMILIES}')
        dim = self.box.dim if self.box is not None else 2
        if self.p < dim:
            raise InvalidEnergyModel('p', self.p, f'p >= d = {dim}')
        if self.r <= 0:
            raise InvalidEnergyModel('r', self.r, 'r > 0')
        if self.family != 'W1' and (self.s is None or self.s < 1):
            raise InvalidEnergyModel('s', self.s, f's >= 1 for {self.family}')
        if self.c <= 0:
            raise InvalidEnergyModel('c', self.c, 'c > 0')
        if self.q is not None and self.q <= 1:
            raise InvalidEnergyModel('q', self.q, 'q > 1')
        if self.g is not None and self.g.shape[-1] != dim and self.box is not None:
            raise InvalidEnergyModel('g', self.g.shape, f'force vectors of dimension {dim}')

    @classmethod
    def from_dict(cls, data: Any) -> EnergyModel:
        if not isinstance(data, dict) or 'family' not in data:
            raise MalformedInput('energy model', 'expected a mapping with at least "family", "p" and "r"')
        known = ('family', 'p', 'r', 's', 'c', 'q', 'g', 'box')
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise MalformedInput('energy model', f'unknown keys {unknown}')
        try:
            return cls(**{k: data[k] for k in known if k in data})
        except (TypeError, KeyError) as e:
            raise MalformedInput('energy model', str(e))

    def to_dict(self) -> dict:
        return {
            'family': self.family,
            'p': self.p,
            'r': self.r,
            's': self.s,
            'c': self.c,
            'q': self.q,
            'g': self.g,
            'box': self.box.to_dict()['vertices'] if self.box is not None else None,
        }

    def validate_dimension(self, dim: int) -> None:
        """Re-check the dimension-dependent bounds against the map dimension ``dim``."""
        if self.p < dim:
            raise InvalidEnergyModel('p', self.p, f'p >= d = {dim}')
        if self.g is not None and self.g.shape[-1] != dim:
            raise InvalidEnergyModel('g', self.g.shape, f'force vectors of dimension {dim}')

    def controls_inner_distortion(self) -> bool:
        """``W(F) >= c |cof F|^3 / det^2`` by Young's inequality."""
        if self.family == 'W1':
            return self.p > 6 and self.r >= 2 * self.p / (self.p - 6)
        return self.p >= 3 and self.r > 2 and self.s >= 3 * self.r / (self.r - 2)

    def controls_outer_distortion(self) -> bool:
        """``W(F) >= c (|F|^6 / det^2 + |cof F|^3q / det^2q)`` for some ``q > 1``."""
        if self.family == 'W1':
            return self.p > 6 and self.r > 2 * self.p / (self.p - 6)
        if self.family == 'W3':
            return self.r > 2 and self.s > 3 * self.r / (self.r - 2)
        return False

    def forces(self, vertex_count: int, dim: int) -> np.ndarray:
        if self.g is None:
            return np.zeros((vertex_count, dim))
        return np.broadcast_to(self.g, (vertex_count, dim))


# ----- densities -----
def _frobenius(matrices: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum('...ij,...ij->...', matrices, matrices))


def _density(model: EnergyModel, F: np.ndarray, dets: np.ndarray, cofs: np.ndarray) -> np.ndarray:
    positive = dets > 0
    safe = np.where(positive, dets, 1.0)
    norms = _frobenius(F)
    value = norms ** model.p + safe ** -model.r
    if model.family != 'W1':
        value = value + _frobenius(cofs) ** model.s
    if model.family == 'W3':
        value = value + norms ** 6 / safe ** 2
    return np.where(positive, value, INFINITE)


def energy_density(model: EnergyModel, F: np.ndarray) -> Union[float, np.ndarray]:
    """``W(F)`` for one matrix or a stack; :data:`INFINITE` where ``det F <= 0``."""
    F = np.asarray(F, dtype=float)
    single = F.ndim == 2
    stack = F[None] if single else F
    value = _density(model, stack, np.linalg.det(stack), cofactors(stack))
    return float(value[0]) if single else value


def _density_derivative(model: EnergyModel, F: np.ndarray, dets: np.ndarray, cofs: np.ndarray) -> np.ndarray:
    """``dW/dF`` per simplex, using ``d det / dF = cof F``."""
    norms = _frobenius(F)[:, None, None]
    det = dets[:, None, None]
    out = model.p * norms ** (model.p - 2) * F - model.r * det ** (-model.r - 1) * cofs
    if model.family != 'W1':
        cof_norm = _frobenius(cofs)[:, None, None]
        if F.shape[-1] == 2:
            cof_square = 2 * F
        else:
            cof_square = 2 * (norms ** 2 * F - F @ np.swapaxes(F, 1, 2) @ F)
        out = out + 0.5 * model.s * cof_norm ** (model.s - 2) * cof_square
    if model.family == 'W3':
        out = out + 6 * norms ** 4 * F / det ** 2 - 2 * norms ** 6 * det ** -3 * cofs
    return out


# ----- distortion -----
@frozen
class DistortionField:
    outer: np.ndarray
    inner: np.ndarray

    def inequality_margin(self, d: int) -> np.ndarray:
        """``(K^O)^(d-1) - c(d) K^I``, non-negative up to rounding."""
        return self.outer ** (d - 1) - DISTORTION_CONSTANT[d] * self.inner

    def to_dict(self) -> dict:
        return {'outer': self.outer, 'inner': self.inner}


def distortions(pmap: PLMap) -> DistortionField:
    """
    Outer ``|F|^d / det`` and inner ``|cof F|^d det^(1-d)`` distortion per simplex.

    :raise NonpositiveDeterminant: some simplex has ``det <= 0``
    """
    dets = pmap.determinants
    bad = np.flatnonzero(dets <= 0)
    if bad.size:
        raise NonpositiveDeterminant(bad)
    d = pmap.dim
    outer = _frobenius(pmap.gradients) ** d / dets
    inner = _frobenius(pmap.cofactors) ** d * dets ** (1 - d)
    field_ = DistortionField(outer=outer, inner=inner)
    margin = field_.inequality_margin(d)
    violated = np.flatnonzero(margin < -DISTORTION_SLACK * outer ** (d - 1))
    if violated.size:
        logger.error(f'Distortion inequality violated on {violated.size} simplices, e.g. {violated[:8].tolist()}')
    return field_


# ----- total energy -----
def lumped_masses(mesh: SimplicialMesh) -> np.ndarray:
    """Vertex masses ``sum vol / (d + 1)`` over the star; exact for affine integrands."""
    masses = np.zeros(mesh.vertex_count)
    np.add.at(masses, mesh.simplices.ravel(), np.repeat(mesh.volumes / (mesh.dim + 1), mesh.dim + 1))
    return masses


def force_term(model: EnergyModel, pmap: PLMap) -> float:
    forces = model.forces(pmap.mesh.vertex_count, pmap.dim)
    return float(lumped_masses(pmap.mesh) @ np.einsum('ij,ij->i', forces, pmap.images))


def elastic_term(model: EnergyModel, pmap: PLMap) -> float:
    values = _density(model, pmap.gradients, pmap.determinants, pmap.cofactors)
    if not np.all(np.isfinite(values)):
        return INFINITE
    return float(pmap.mesh.volumes @ values)


def total_energy(model: EnergyModel, pmap: PLMap) -> float:
    """``sum vol * W(grad y)`` plus the vertex-lumped ``int g . y``; :data:`INFINITE` on any ``det <= 0``."""
    elastic = elastic_term(model, pmap)
    if elastic == INFINITE:
        return INFINITE
    return elastic + force_term(model, pmap)


def energy_gradient(model: EnergyModel, pmap: PLMap) -> np.ndarray:
    """
    Exact derivative of :func:`total_energy` with respect to every vertex image, ``(n, d)``.

    :raise NonpositiveDeterminant: some simplex has ``det <= 0``
    """
    mesh = pmap.mesh
    dets = pmap.determinants
    bad = np.flatnonzero(dets <= 0)
    if bad.size:
        raise NonpositiveDeterminant(bad)
    dW = _density_derivative(model, pmap.gradients, dets, pmap.cofactors)
    dom_edges = np.swapaxes(mesh.simplex_points[:, 1:] - mesh.simplex_points[:, :1], 1, 2)
    # F = E_img D^-1, so dE/dE_img = dW/dF D^-T; column i belongs to local vertex i + 1
    per_edge = mesh.volumes[:, None, None] * (dW @ np.swapaxes(np.linalg.inv(dom_edges), 1, 2))
    local = np.concatenate([-per_edge.sum(axis=2, keepdims=True), per_edge], axis=2)
    grad = np.zeros_like(pmap.images)
    np.add.at(grad, mesh.simplices.ravel(), np.swapaxes(local, 1, 2).reshape(-1, mesh.dim))
    grad += lumped_masses(mesh)[:, None] * model.forces(mesh.vertex_count, mesh.dim)
    return grad


# ----- feasible start -----
def scaled_translate(mesh: SimplicialMesh, box: Box, fill: float = SCALED_TRANSLATE_FILL) -> PLMap:
    """
    ``z0 + lambda x`` centred in the box, with ``lambda`` the given fraction of the largest scale that fits.

    :raise InfeasibleInitial: the fraction is outside ``(0, 1]``
    """
    if not 0 < fill <= 1:
        raise InfeasibleInitial(f'fill fraction {fill} outside (0, 1]')
    if box.dim != mesh.dim:
        raise InfeasibleInitial(f'box dimension {box.dim} differs from the mesh dimension {mesh.dim}')
    z0 = box.vertices.mean(axis=0)
    rel = mesh.vertices - mesh.vertices.mean(axis=0)
    reach = rel @ box.normals.T
    room = -(box.normals @ z0 + box.offsets)
    limits = np.where(reach > 0, room[None, :] / np.where(reach > 0, reach, 1.0), np.inf)
    scale = fill * float(limits.min())
    logger.debug(f'Scaled translate with lambda = {scale:.6g} around {z0}')
    return PLMap.from_images(mesh, z0 + scale * rel)
