"""
Simplicial meshes of bounded polyhedral domains in two and three dimensions.
"""
from __future__ import annotations
from typing import Optional, Sequence
from typing_extensions import Final

import numpy as np
from attrs import frozen, field
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import log
from ..errors_collection import DegenerateSimplex, NonManifold, Disconnected, MalformedInput
from .geometry import signed_volumes

logger = log.getLogger('plinv.mesh')

GEOM_TOLERANCE: Final = 1e-9  # x bounding-box diagonal
VOLUME_TOLERANCE: Final = 1e-12  # x diagonal ** d
SUPPORTED_DIMS: Final = (2, 3)


def _as_array(value, dtype) -> np.ndarray:
    array = np.array(value, dtype=dtype)
    array.setflags(write=False)
    return array


@frozen(eq=False)
class SimplicialMesh:
    """
    A validated simplicial mesh.

    Every simplex is positively oriented. ``adjacency[s, j]`` is the simplex across the facet opposite
    local vertex ``j`` of simplex ``s`` or -1 on the boundary. Boundary facets carry the induced
    orientation (counter-clockwise in 2D, outward normal by the right-hand rule in 3D).
    Submeshes remember the ids of their vertices and simplices in the parent mesh.
    """
    dim: int
    vertices: np.ndarray = field(converter=lambda v: _as_array(v, float))
    simplices: np.ndarray = field(converter=lambda s: _as_array(s, np.int64))
    volumes: np.ndarray = field(converter=lambda v: _as_array(v, float))
    adjacency: np.ndarray = field(converter=lambda a: _as_array(a, np.int64))
    boundary_facets: np.ndarray = field(converter=lambda b: _as_array(b, np.int64))
    boundary_owners: np.ndarray = field(converter=lambda b: _as_array(b, np.int64))
    interior_facet_count: int
    diag: float
    parent_vertices: Optional[np.ndarray] = None
    parent_simplices: Optional[np.ndarray] = None

    # ----- derived quantities -----
    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def simplex_count(self) -> int:
        return self.simplices.shape[0]

    @property
    def tau_geom(self) -> float:
        return GEOM_TOLERANCE * self.diag

    @property
    def tau_vol(self) -> float:
        return VOLUME_TOLERANCE * self.diag ** self.dim

    @property
    def total_volume(self) -> float:
        return float(self.volumes.sum())

    @property
    def simplex_points(self) -> np.ndarray:
        return self.vertices[self.simplices]

    @property
    def centroids(self) -> np.ndarray:
        return self.simplex_points.mean(axis=1)

    @property
    def boundary_points(self) -> np.ndarray:
        return self.vertices[self.boundary_facets]

    @property
    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.vertex_count, dtype=bool)
        mask[self.boundary_facets.ravel()] = True
        return mask

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def is_submesh(self) -> bool:
        return self.parent_simplices is not None

    def boundary_simplex_mask(self) -> np.ndarray:
        """Simplices owning at least one boundary facet."""
        return np.any(self.adjacency < 0, axis=1)

    def vertex_stars(self) -> list[np.ndarray]:
        """Incident simplices of every vertex."""
        order = np.argsort(self.simplices.ravel(), kind='stable')
        flat = self.simplices.ravel()[order]
        owners = order // (self.dim + 1)
        splits = np.searchsorted(flat, np.arange(1, self.vertex_count))
        return np.split(owners, splits)

    def to_dict(self) -> dict:
        return {'dim': self.dim, 'vertices': self.vertices, 'simplices': self.simplices}


# ----- construction -----
def _oriented_facets(simplices: np.ndarray) -> np.ndarray:
    """Facets ``(d + 1, m, d)``: facet ``j`` omits local vertex ``j``, reversed for odd ``j``."""
    d = simplices.shape[1] - 1
    facets = []
    for j in range(d + 1):
        facet = np.delete(simplices, j, axis=1)
        if j % 2 == 1:
            facet = facet[:, [1, 0] + list(range(2, d))]
        facets.append(facet)
    return np.stack(facets)


def _parity(tuples: np.ndarray) -> np.ndarray:
    inversions = np.zeros(tuples.shape[0], dtype=np.int64)
    k = tuples.shape[1]
    for i in range(k):
        for j in range(i + 1, k):
            inversions += tuples[:, i] > tuples[:, j]
    return inversions % 2


def _validate_input(dim: int, vertices: np.ndarray, simplices: np.ndarray):
    if dim not in SUPPORTED_DIMS:
        raise MalformedInput('mesh', f'dimension {dim} is not supported')
    if vertices.ndim != 2 or vertices.shape[1] != dim:
        raise MalformedInput('mesh', f'vertices must be an array of {dim}-vectors')
    if simplices.ndim != 2 or simplices.shape[1] != dim + 1:
        raise MalformedInput('mesh', f'simplices must be an array of {dim + 1}-tuples')
    if simplices.shape[0] == 0:
        raise MalformedInput('mesh', 'at least one simplex is required')
    if simplices.min() < 0 or simplices.max() >= vertices.shape[0]:
        raise MalformedInput('mesh', 'vertex index out of range')
    if not np.all(np.isfinite(vertices)):
        raise MalformedInput('mesh', 'vertex coordinates must be finite')


def build_mesh(dim: int, vertices: Sequence, simplices: Sequence, *,
               require_connected: bool = True,
               reference_diag: Optional[float] = None,
               parent_vertices: Optional[np.ndarray] = None,
               parent_simplices: Optional[np.ndarray] = None) -> SimplicialMesh:
    """
    Validate a mesh and derive its boundary complex.

    Vertex tuples with negative signed volume are reordered to positive orientation.

    :param reference_diag: diagonal the tolerances are relative to (defaults to the own bounding box)
    :raise DegenerateSimplex: a simplex volume is below the volume tolerance
    :raise NonManifold: a facet is shared by more than two simplices
    :raise Disconnected: the simplex adjacency graph is not connected (only if ``require_connected``)
    """
    vertices = np.asarray(vertices, dtype=float)
    simplices = np.array(simplices, dtype=np.int64)
    _validate_input(dim, vertices, simplices)
    m = simplices.shape[0]

    used = vertices[np.unique(simplices)]
    diag = reference_diag or float(np.linalg.norm(used.max(axis=0) - used.min(axis=0)))
    tau_vol = VOLUME_TOLERANCE * diag ** dim

    volumes = signed_volumes(vertices[simplices])
    degenerate = np.flatnonzero(np.abs(volumes) <= tau_vol)
    if degenerate.size:
        s = int(degenerate[0])
        raise DegenerateSimplex(s, float(abs(volumes[s])), tau_vol)
    flipped = volumes < 0
    if np.any(flipped):
        simplices[flipped] = simplices[flipped][:, [1, 0] + list(range(2, dim + 1))]
        volumes = np.abs(volumes)
        logger.debug(f'Reoriented {int(flipped.sum())} simplices')

    oriented = _oriented_facets(simplices).reshape(-1, dim)  # row = j * m + s
    keys = np.sort(oriented, axis=1)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        bad = int(np.flatnonzero(counts[inverse] > 2)[0])
        raise NonManifold(keys[bad], int(counts[inverse[bad]]))

    rows = np.arange(oriented.shape[0])
    owner = rows % m
    local = rows // m
    adjacency = np.full((m, dim + 1), -1, dtype=np.int64)
    shared = counts[inverse] == 2
    order = np.argsort(inverse[shared], kind='stable')
    pairs = rows[shared][order].reshape(-1, 2)
    if pairs.size:
        parity = _parity(oriented[pairs.ravel()]).reshape(-1, 2)
        clash = np.flatnonzero(parity[:, 0] == parity[:, 1])
        if clash.size:
            a, b = pairs[clash[0]]
            raise MalformedInput('mesh', f'simplices {owner[a]} and {owner[b]} overlap across a shared facet')
        adjacency[owner[pairs[:, 0]], local[pairs[:, 0]]] = owner[pairs[:, 1]]
        adjacency[owner[pairs[:, 1]], local[pairs[:, 1]]] = owner[pairs[:, 0]]

    if require_connected and m > 1:
        graph = coo_matrix((np.ones(pairs.shape[0]), (owner[pairs[:, 0]], owner[pairs[:, 1]])), shape=(m, m))
        n_components, _ = connected_components(graph, directed=False)
        if n_components != 1:
            raise Disconnected(n_components)

    boundary_rows = rows[counts[inverse] == 1]
    return SimplicialMesh(
        dim=dim,
        vertices=vertices,
        simplices=simplices,
        volumes=volumes,
        adjacency=adjacency,
        boundary_facets=oriented[boundary_rows],
        boundary_owners=owner[boundary_rows],
        interior_facet_count=int(pairs.shape[0]),
        diag=diag,
        parent_vertices=None if parent_vertices is None else _as_array(parent_vertices, np.int64),
        parent_simplices=None if parent_simplices is None else _as_array(parent_simplices, np.int64),
    )


def submesh(mesh: SimplicialMesh, simplex_ids: Sequence[int]) -> SimplicialMesh:
    """
    The submesh made of the given simplices, with vertices renumbered.

    Parent ids always refer to the root mesh, so submeshes of submeshes stay comparable.
    Submeshes need not be connected.
    """
    simplex_ids = np.unique(np.asarray(simplex_ids, dtype=np.int64))
    if simplex_ids.size == 0:
        raise MalformedInput('submesh', 'no simplices selected')
    local = mesh.simplices[simplex_ids]
    kept, renumbered = np.unique(local, return_inverse=True)
    parent_v = kept if mesh.parent_vertices is None else mesh.parent_vertices[kept]
    parent_s = simplex_ids if mesh.parent_simplices is None else mesh.parent_simplices[simplex_ids]
    return build_mesh(mesh.dim, mesh.vertices[kept], renumbered.reshape(local.shape),
                      require_connected=False, reference_diag=mesh.diag,
                      parent_vertices=parent_v, parent_simplices=parent_s)


def root_simplex_ids(mesh: SimplicialMesh) -> np.ndarray:
    return np.arange(mesh.simplex_count) if mesh.parent_simplices is None else mesh.parent_simplices


def root_vertex_ids(mesh: SimplicialMesh) -> np.ndarray:
    return np.arange(mesh.vertex_count) if mesh.parent_vertices is None else mesh.parent_vertices


def simplex_graph(mesh: SimplicialMesh) -> coo_matrix:
    """Facet adjacency of simplices as a sparse symmetric matrix."""
    s, j = np.nonzero(mesh.adjacency >= 0)
    t = mesh.adjacency[s, j]
    return coo_matrix((np.ones(s.size), (s, t)), shape=(mesh.simplex_count, mesh.simplex_count))
