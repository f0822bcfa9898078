from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np
from attrs import frozen, field

from ..errors_collection import MalformedInput
from ..mesh.simplicial import SimplicialMesh, root_vertex_ids
from ..serialize import array_digest

DEGREE_TOLERANCE: Final = 1e-6  # x image bounding-box diagonal
IMAGE_GEOM_TOLERANCE: Final = 1e-9
IMAGE_VOLUME_TOLERANCE: Final = 1e-12


def _readonly(value) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.setflags(write=False)
    return array


def image_scale(images: np.ndarray) -> float:
    """Bounding-box diagonal of a point cloud, or a unit-ish scale when it collapses to a point."""
    diag = float(np.linalg.norm(images.max(axis=0) - images.min(axis=0)))
    return diag if diag > 1e-300 else max(1.0, float(np.abs(images).max()))


def cofactors(gradients: np.ndarray) -> np.ndarray:
    """Cofactor matrices, so that ``cof(F).T @ F == det(F) * Id``."""
    d = gradients.shape[-1]
    if d == 2:
        a, b = gradients[:, 0, 0], gradients[:, 0, 1]
        c, e = gradients[:, 1, 0], gradients[:, 1, 1]
        return np.stack([np.stack([e, -c], axis=1), np.stack([-b, a], axis=1)], axis=1)
    rows = [gradients[:, i, :] for i in range(3)]
    return np.stack([np.cross(rows[1], rows[2]), np.cross(rows[2], rows[0]), np.cross(rows[0], rows[1])], axis=1)


def affine_differentials(mesh: SimplicialMesh, images: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-simplex gradient, determinant and cofactor of the affine interpolant."""
    dom = mesh.vertices[mesh.simplices]
    img = images[mesh.simplices]
    dom_edges = np.swapaxes(dom[:, 1:] - dom[:, :1], 1, 2)
    img_edges = np.swapaxes(img[:, 1:] - img[:, :1], 1, 2)
    gradients = img_edges @ np.linalg.inv(dom_edges)
    return gradients, np.linalg.det(gradients), cofactors(gradients)


@frozen(eq=False)
class PLMap:
    """
    A continuous map, affine on every simplex, given by one image point per vertex.

    ``image_diag`` is the image bounding-box diagonal of the map this one was restricted from;
    image-side tolerances stay fixed under restriction.
    """
    mesh: SimplicialMesh
    images: np.ndarray = field(converter=_readonly)
    gradients: np.ndarray = field(converter=_readonly)
    determinants: np.ndarray = field(converter=_readonly)
    cofactors: np.ndarray = field(converter=_readonly)
    image_diag: float

    @classmethod
    def from_images(cls, mesh: SimplicialMesh, images, image_diag: Optional[float] = None) -> PLMap:
        images = np.asarray(images, dtype=float)
        if images.shape != mesh.vertices.shape:
            raise MalformedInput('map', f'images have shape {images.shape}, expected {mesh.vertices.shape}')
        gradients, dets, cofs = affine_differentials(mesh, images)
        return cls(mesh=mesh, images=images, gradients=gradients, determinants=dets, cofactors=cofs,
                   image_diag=image_diag or image_scale(images))

    @classmethod
    def identity(cls, mesh: SimplicialMesh) -> PLMap:
        return cls.from_images(mesh, mesh.vertices)

    # ----- tolerances -----
    @property
    def tau_deg(self) -> float:
        return DEGREE_TOLERANCE * self.image_diag

    @property
    def tau_geom(self) -> float:
        return IMAGE_GEOM_TOLERANCE * self.image_diag

    @property
    def tau_vol(self) -> float:
        return IMAGE_VOLUME_TOLERANCE * self.image_diag ** self.mesh.dim

    # ----- geometry of the image -----
    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def image_points(self) -> np.ndarray:
        return self.images[self.mesh.simplices]

    @property
    def image_volumes(self) -> np.ndarray:
        return self.determinants * self.mesh.volumes

    @property
    def boundary_image_points(self) -> np.ndarray:
        return self.images[self.mesh.boundary_facets]

    @property
    def image_bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.images.min(axis=0), self.images.max(axis=0)

    @property
    def is_orientation_preserving(self) -> bool:
        return bool(np.all(self.determinants > 0))

    def digest(self) -> str:
        return array_digest(self.mesh.vertices, self.mesh.simplices, self.images)

    def with_images(self, images: np.ndarray) -> PLMap:
        return PLMap.from_images(self.mesh, images, image_diag=self.image_diag)

    def restrict(self, sub: Optional[SimplicialMesh]) -> PLMap:
        """The map restricted to a submesh of its domain (``None`` for the whole domain)."""
        if sub is None or sub is self.mesh:
            return self
        own = root_vertex_ids(self.mesh)
        wanted = root_vertex_ids(sub)
        pos = np.searchsorted(own, wanted)
        if np.any(pos >= own.size) or np.any(own[np.minimum(pos, own.size - 1)] != wanted):
            raise MalformedInput('submesh', 'it is not part of the map domain')
        return PLMap.from_images(sub, self.images[pos], image_diag=self.image_diag)

    def __call__(self, points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
        """Images of points known to lie in the given simplices."""
        points = np.atleast_2d(points)
        simplices = np.asarray(simplices)
        base = self.mesh.vertices[self.mesh.simplices[simplices, 0]]
        offset = self.images[self.mesh.simplices[simplices, 0]]
        return offset + np.einsum('kij,kj->ki', self.gradients[simplices], points - base)


def pl_differentials(pmap: PLMap) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Recompute ``(gradient, det, cof)`` per simplex from the vertex images."""
    return affine_differentials(pmap.mesh, pmap.images)
