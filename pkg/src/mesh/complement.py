"""
Connected components of the complement of a mesh boundary.
"""
from __future__ import annotations
from typing import Optional

import numpy as np
from attrs import frozen
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import log
from .grid import GridSpec, RegionGrid, rasterize, label_regions
from .locate import locate_point
from .simplicial import SimplicialMesh

logger = log.getLogger('plinv.mesh')


@frozen(eq=False)
class ComplementRegion:
    label: int
    representatives: np.ndarray
    inside_domain: bool
    measure: float

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'representatives': self.representatives,
            'inside_domain': self.inside_domain,
            'measure': self.measure,
        }


@frozen(eq=False)
class ComplementDecomposition:
    bounded_components: tuple[ComplementRegion, ...]
    unbounded_component: ComplementRegion
    component_count: int
    euler_count: Optional[int]  # 2D only
    region_grid: RegionGrid

    @property
    def is_two_component(self) -> bool:
        return self.component_count == 2

    def to_dict(self) -> dict:
        return {
            'bounded_components': [r.to_dict() for r in self.bounded_components],
            'unbounded_component': self.unbounded_component.to_dict(),
            'component_count': self.component_count,
            'euler_count': self.euler_count,
            'two_components': self.is_two_component,
            'grid': self.region_grid.grid.resolution_record,
        }


def boundary_euler_count(mesh: SimplicialMesh) -> int:
    """Number of complement components of a planar boundary graph: ``1 + E - V + C``."""
    facets = mesh.boundary_facets
    used, local = np.unique(facets, return_inverse=True)
    local = local.reshape(facets.shape)
    graph = coo_matrix((np.ones(local.shape[0]), (local[:, 0], local[:, 1])), shape=(used.size, used.size))
    n_components, _ = connected_components(graph, directed=False)
    return 1 + facets.shape[0] - used.size + n_components


def complement_components(mesh: SimplicialMesh, resolution: Optional[int] = None) -> ComplementDecomposition:
    """Label every connected region of ``R^d`` minus the boundary polyhedron."""
    lo, hi = mesh.bbox
    grid = GridSpec.covering(lo, hi, resolution)
    regions = label_regions(grid, rasterize(grid, mesh.boundary_points))

    def region(label: int) -> ComplementRegion:
        reps = regions.representatives[label]
        return ComplementRegion(label=label, representatives=reps,
                                inside_domain=locate_point(mesh, reps[0]).simplex is not None,
                                measure=regions.measure(label))

    bounded = tuple(region(lab) for lab in regions.bounded)
    count = len(regions.regions)
    euler = boundary_euler_count(mesh) if mesh.dim == 2 else None
    if euler is not None and euler != count:
        logger.warning(f'Grid complement count {count} disagrees with the boundary Euler count {euler}; '
                       f'the grid (cell size {grid.h:.3g}) may be too coarse')
    return ComplementDecomposition(bounded_components=bounded, unbounded_component=region(regions.unbounded),
                                   component_count=count, euler_count=euler, region_grid=regions)
