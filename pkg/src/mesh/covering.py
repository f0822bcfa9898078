"""
Regular inner coverings by distance thresholds.
"""
from __future__ import annotations
from typing import Optional

import numpy as np
from attrs import frozen

from .. import log
from ..errors_collection import EmptyLevel, MalformedInput
from .complement import complement_components
from .geometry import distance_to_hull_union
from .simplicial import SimplicialMesh, submesh

logger = log.getLogger('plinv.mesh')


@frozen(eq=False)
class InnerCovering:
    """Nested submeshes; level ``m`` keeps simplices with every vertex at least ``offsets[m]`` off the boundary."""
    mesh: SimplicialMesh
    levels: tuple[SimplicialMesh, ...]
    offsets: tuple[float, ...]
    complement_counts: tuple[Optional[int], ...]
    inherits_complement: tuple[Optional[bool], ...]

    def __len__(self):
        return len(self.levels)

    def to_dict(self) -> dict:
        return {
            'offsets': list(self.offsets),
            'simplex_counts': [level.simplex_count for level in self.levels],
            'complement_counts': list(self.complement_counts),
            'inherits_complement': list(self.inherits_complement),
        }


def boundary_distances(mesh: SimplicialMesh) -> np.ndarray:
    """Distance of every vertex to the boundary polyhedron."""
    dist = np.zeros(mesh.vertex_count)
    interior = np.flatnonzero(~mesh.boundary_vertex_mask)
    if interior.size:
        dist[interior] = distance_to_hull_union(mesh.boundary_points, mesh.vertices[interior])
    return dist


def inner_covering(mesh: SimplicialMesh, level_count: int, check_complement: bool = True,
                   resolution: Optional[int] = None) -> InnerCovering:
    """
    Build ``level_count`` nested levels with offsets ``D / (m + 1)``, ``D`` the largest vertex distance to the boundary.

    :param check_complement: compute each level's complement count and whether it keeps the two-component
        property of the full mesh
    :raise EmptyLevel: no simplex qualifies for a level
    """
    if level_count < 1:
        raise MalformedInput('covering', 'level_count must be at least 1')
    dist = boundary_distances(mesh)
    simplex_clearance = dist[mesh.simplices].min(axis=1)
    top = float(dist.max())

    levels = []
    offsets = []
    counts = []
    inherits = []
    full_two = complement_components(mesh, resolution).is_two_component if check_complement else None
    for m in range(1, level_count + 1):
        offset = top / (m + 1)
        keep = np.flatnonzero((simplex_clearance >= offset) & (simplex_clearance > 0))
        if keep.size == 0:
            raise EmptyLevel(m, offset)
        level = submesh(mesh, keep)
        levels.append(level)
        offsets.append(offset)
        if check_complement:
            count = complement_components(level, resolution).component_count
            counts.append(count)
            inherits.append(count == 2 if full_two else None)
        else:
            counts.append(None)
            inherits.append(None)
        logger.debug(f'Inner covering level {m}: offset {offset:.4g}, {keep.size} simplices')
    return InnerCovering(mesh=mesh, levels=tuple(levels), offsets=tuple(offsets),
                         complement_counts=tuple(counts), inherits_complement=tuple(inherits))
