"""
Degree on every connected region of the complement of the boundary image.
"""
from __future__ import annotations
from typing import Optional, Union
from typing_extensions import Final

from threading import RLock

import numpy as np
from attrs import frozen
from cachetools import LRUCache, cached
from cachetools.keys import hashkey

from .. import log
from ..aio_helper import gather_in_pool, THREAD_COUNT
from ..errors_collection import InconsistentRegion
from ..mesh.grid import GridSpec, RegionGrid, rasterize, label_regions
from ..mesh.simplicial import SimplicialMesh
from .algorithms import winding_numbers, round_winding
from .plmap import PLMap

logger = log.getLogger('plinv.degree')

MIXED: Final = 'Mixed'

Sigma = Union[int, str, None]


@frozen(eq=False)
class DegreeRegion:
    label: int
    degree: int
    representatives: np.ndarray
    measure: float
    clearance: float
    bounded: bool

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'degree': self.degree,
            'representatives': self.representatives,
            'measure': self.measure,
            'clearance': self.clearance,
            'bounded': self.bounded,
        }


@frozen(eq=False)
class DegreeReport:
    """
    Regions of ``R^d`` minus the boundary image with one integer degree each.

    ``sigma`` is the common nonzero degree, :data:`MIXED` when nonzero degrees differ and ``None``
    when no region carries a nonzero degree.
    """
    regions: tuple[DegreeRegion, ...]
    sigma: Sigma
    region_grid: RegionGrid

    @property
    def grid(self) -> GridSpec:
        return self.region_grid.grid

    @property
    def degrees(self) -> dict[int, int]:
        return {r.label: r.degree for r in self.regions}

    @property
    def nonzero_regions(self) -> tuple[DegreeRegion, ...]:
        return tuple(r for r in self.regions if r.degree != 0)

    @property
    def max_degree(self) -> int:
        return max(r.degree for r in self.regions)

    def region(self, label: int) -> Optional[DegreeRegion]:
        for r in self.regions:
            if r.label == label:
                return r
        return None

    def degree_at(self, points: np.ndarray) -> np.ndarray:
        """
        Degree looked up through the region grid; NaN on blocked cells and slivers.
        """
        labels = self.region_grid.region_of(np.atleast_2d(points))
        lookup = self.degrees
        return np.array([lookup.get(int(lab), np.nan) for lab in labels], dtype=float)

    def to_dict(self) -> dict:
        return {
            'regions': [r.to_dict() for r in self.regions],
            'sigma': self.sigma,
            'sliver_count': len(self.region_grid.slivers),
            'grid': self.grid.resolution_record,
        }


def summarize_sigma(degrees) -> Sigma:
    nonzero = sorted({int(k) for k in degrees if k != 0})
    if not nonzero:
        return None
    return nonzero[0] if len(nonzero) == 1 else MIXED


def _field_key(pmap: PLMap, A: Optional[SimplicialMesh] = None, resolution: Optional[int] = None,
               grid: Optional[GridSpec] = None):
    local = pmap.restrict(A)
    grid_key = None if grid is None else (tuple(grid.origin.tolist()), grid.h, grid.shape)
    return hashkey(local.digest(), local.image_diag, resolution, grid_key)


@cached(cache=LRUCache(maxsize=16), key=_field_key, lock=RLock())
def degree_field(pmap: PLMap, A: Optional[SimplicialMesh] = None, resolution: Optional[int] = None,
                 grid: Optional[GridSpec] = None) -> DegreeReport:
    """
    Classify the complement of the boundary image by flood fill and evaluate the degree at the
    representatives of every region.

    :param grid: a fixed grid to label on (used to compare several submeshes on the same cells)
    :raise InconsistentRegion: representatives of one region disagree, or the unbounded region is not 0
    """
    local = pmap.restrict(A)
    facets = local.boundary_image_points
    if grid is None:
        flat = facets.reshape(-1, local.dim)
        grid = GridSpec.covering(flat.min(axis=0), flat.max(axis=0), resolution)
    regions = label_regions(grid, rasterize(grid, facets))

    labels = list(regions.regions)
    reps = [regions.representatives[lab] for lab in labels]
    points = np.concatenate(reps)
    chunks = np.array_split(points, min(THREAD_COUNT, max(1, points.shape[0] // 8)))
    windings = np.concatenate(gather_in_pool((winding_numbers, (local, None, chunk), {}) for chunk in chunks))

    out = []
    start = 0
    for lab, rep in zip(labels, reps):
        values = windings[start:start + rep.shape[0]]
        start += rep.shape[0]
        degrees = [round_winding(p, v) for p, v in zip(rep, values)]
        bounded = lab != regions.unbounded
        if len(set(degrees)) != 1 or (not bounded and degrees[0] != 0):
            raise InconsistentRegion(lab, degrees)
        out.append(DegreeRegion(label=lab, degree=degrees[0], representatives=rep, measure=regions.measure(lab),
                                clearance=regions.clearance[lab], bounded=bounded))
    sigma = summarize_sigma(r.degree for r in out)
    logger.debug(f'Degree field: {len(out)} regions, sigma {sigma}, cell size {grid.h:.3g}')
    return DegreeReport(regions=tuple(out), sigma=sigma, region_grid=regions)
