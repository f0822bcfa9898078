"""
Topological and localized images as cell sets on a background grid.
"""
from __future__ import annotations
from typing import Optional

import numpy as np
from attrs import frozen
from scipy import ndimage

from .. import log
from ..degree import PLMap, DegreeRegion, degree_field, degree_boundary, preimages
from ..errors_collection import QueryErrors
from ..mesh.covering import InnerCovering
from ..mesh.grid import GridSpec, rasterize
from ..mesh.simplicial import SimplicialMesh

logger = log.getLogger('plinv.topology')


@frozen(eq=False)
class RegionSet:
    """A union of degree regions, stored as a cell mask so sets over one grid can be combined."""
    grid: GridSpec
    mask: np.ndarray
    regions: tuple[DegreeRegion, ...]

    @property
    def measure(self) -> float:
        return float(self.mask.sum()) * self.grid.h ** self.grid.dim

    @property
    def is_empty(self) -> bool:
        return not self.regions

    @property
    def degrees(self) -> list[int]:
        return sorted({r.degree for r in self.regions})

    def contains(self, points: np.ndarray) -> np.ndarray:
        idx, inside = self.grid.cell_index(np.atleast_2d(points))
        out = np.zeros(idx.shape[0], dtype=bool)
        out[inside] = self.mask[tuple(idx[inside].T)]
        return out

    def union(self, other: RegionSet) -> RegionSet:
        return RegionSet(grid=self.grid, mask=self.mask | other.mask, regions=self.regions + other.regions)

    def cells_outside(self, other: RegionSet) -> int:
        return int(np.count_nonzero(self.mask & ~other.mask))

    def to_dict(self) -> dict:
        return {
            'regions': [{'degree': r.degree, 'representatives': r.representatives, 'measure': r.measure}
                        for r in self.regions],
            'measure': self.measure,
            'grid': self.grid.resolution_record,
        }


@frozen(eq=False)
class LocalizedImage:
    levels: tuple[RegionSet, ...]
    union: RegionSet

    def to_dict(self) -> dict:
        return {
            'union': self.union.to_dict(),
            'level_measures': [level.measure for level in self.levels],
        }


def map_grid(pmap: PLMap, resolution: Optional[int] = None) -> GridSpec:
    """A grid covering the whole image of the map, shared by all of its submeshes."""
    lo, hi = pmap.image_bbox
    return GridSpec.covering(lo, hi, resolution)


def topological_image(pmap: PLMap, A: Optional[SimplicialMesh] = None, resolution: Optional[int] = None,
                      grid: Optional[GridSpec] = None) -> RegionSet:
    """The regions of nonzero degree."""
    report = degree_field(pmap, A, resolution, grid)
    nonzero = report.nonzero_regions
    mask = np.isin(report.region_grid.labels, [r.label for r in nonzero])
    return RegionSet(grid=report.grid, mask=mask, regions=nonzero)


def localized_image(pmap: PLMap, covering: InnerCovering, resolution: Optional[int] = None) -> LocalizedImage:
    """Union of the topological images of all covering levels, on one grid."""
    grid = map_grid(pmap, resolution)
    levels = tuple(topological_image(pmap, level, grid=grid) for level in covering.levels)
    union = levels[0]
    for level in levels[1:]:
        union = union.union(level)
    return LocalizedImage(levels=levels, union=union)


# ----- structure checks -----
def check_image_monotonicity(pmap: PLMap, covering: InnerCovering, resolution: Optional[int] = None) -> list[dict]:
    """
    Representatives of ``im_T(level m)`` that are neither in ``im_T(level m + 1)`` nor on the
    boundary image of level ``m + 1``. An empty list means the images grow with the levels.
    """
    witnesses = []
    grid = map_grid(pmap, resolution)
    for m in range(len(covering.levels) - 1):
        inner = topological_image(pmap, covering.levels[m], grid=grid)
        outer = covering.levels[m + 1]
        for region in inner.regions:
            for point in region.representatives:
                try:
                    degree = degree_boundary(pmap, outer, point)
                except QueryErrors:
                    continue
                if degree == 0:
                    witnesses.append({'level': m, 'point': point, 'inner_degree': region.degree})
    return witnesses


def check_image_identity(pmap: PLMap, A: Optional[SimplicialMesh] = None,
                         resolution: Optional[int] = None) -> dict[str, list]:
    """
    Compare ``im_T(y; A)`` with ``y(A)`` minus the boundary image.

    ``uncovered``: image centroids off the boundary image with degree 0;
    ``unreached``: nonzero-degree representatives without a preimage.
    """
    local = pmap.restrict(A)
    uncovered = []
    for s, point in enumerate(local.image_points.mean(axis=1)):
        if abs(local.image_volumes[s]) <= local.tau_vol:
            continue
        try:
            if degree_boundary(local, None, point) == 0:
                uncovered.append({'simplex': s, 'point': point})
        except QueryErrors:
            continue
    unreached = []
    for region in topological_image(local, None, resolution).regions:
        for point in region.representatives:
            if preimages(local, point).count == 0:
                unreached.append({'point': point, 'degree': region.degree})
    return {'uncovered': uncovered, 'unreached': unreached}


@frozen
class EmptyInteriorCheck:
    holds: bool
    filled_cells: int
    cell_size: float

    def to_dict(self) -> dict:
        return {'holds': self.holds, 'filled_cells': self.filled_cells, 'cell_size': self.cell_size}


def image_has_empty_interior(pmap: PLMap, facets: Optional[np.ndarray] = None,
                             resolution: Optional[int] = None) -> EmptyInteriorCheck:
    """
    Whether the image of a union of facets contains a whole grid cell together with its neighbours.

    :param facets: ``(k, d)`` vertex indices of the facets (defaults to the boundary facets)
    """
    facets = pmap.mesh.boundary_facets if facets is None else np.asarray(facets, dtype=np.int64)
    grid = map_grid(pmap, resolution)
    blocked = rasterize(grid, pmap.images[facets])
    core = ndimage.binary_erosion(blocked, structure=ndimage.generate_binary_structure(grid.dim, grid.dim))
    filled = int(np.count_nonzero(core))
    return EmptyInteriorCheck(holds=filled == 0, filled_cells=filled, cell_size=grid.h)
