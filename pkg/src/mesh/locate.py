from __future__ import annotations
from typing import Optional

import numpy as np
from attrs import frozen

from .geometry import simplex_distance, barycentric
from .simplicial import SimplicialMesh


@frozen(eq=False)
class PointLocation:
    simplex: Optional[int]  # None: outside the mesh
    on_boundary_facet: bool
    barycentric: Optional[np.ndarray] = None

    @property
    def outside(self) -> bool:
        return self.simplex is None


def locate_point(mesh: SimplicialMesh, z) -> PointLocation:
    """
    Find the simplex whose closed hull contains ``z`` (lowest index on ties).

    ``on_boundary_facet`` is set when ``z`` lies within the geometric tolerance of a boundary facet;
    the caller decides whether to perturb.
    """
    z = np.asarray(z, dtype=float)
    tol = mesh.tau_geom
    points = mesh.simplex_points
    lo = points.min(axis=1) - tol
    hi = points.max(axis=1) + tol
    candidates = np.flatnonzero(np.all((lo <= z) & (z <= hi), axis=1))

    on_boundary = False
    boundary = mesh.boundary_points
    b_lo = boundary.min(axis=1) - tol
    b_hi = boundary.max(axis=1) + tol
    near = np.flatnonzero(np.all((b_lo <= z) & (z <= b_hi), axis=1))
    if near.size:
        on_boundary = bool(np.any(simplex_distance(boundary[near], z) <= tol))

    if candidates.size == 0:
        return PointLocation(simplex=None, on_boundary_facet=on_boundary)
    dist = simplex_distance(points[candidates], z)
    hits = candidates[dist <= tol]
    if hits.size == 0:
        return PointLocation(simplex=None, on_boundary_facet=on_boundary)
    s = int(hits.min())
    return PointLocation(simplex=s, on_boundary_facet=on_boundary,
                         barycentric=barycentric(points[s:s + 1], z)[0])


def locate_points(mesh: SimplicialMesh, points: np.ndarray) -> np.ndarray:
    """Containing simplex of each point, -1 when outside."""
    return np.array([-1 if (loc := locate_point(mesh, p)).simplex is None else loc.simplex
                     for p in np.atleast_2d(points)], dtype=np.int64)
