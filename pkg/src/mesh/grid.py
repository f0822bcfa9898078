"""
Background grid: rasterised facet sets, flood-fill labelling of the complement and region representatives.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np
from attrs import frozen
from scipy import ndimage

from .. import log

logger = log.getLogger('plinv.grid')

DEFAULT_RESOLUTION: Final = {2: 256, 3: 96}
PADDING_CELLS: Final = 3
SLIVER_CLEARANCE: Final = 1.5  # in cells
REPRESENTATIVES_PER_REGION: Final = 3
SAMPLE_SPACING: Final = {2: 1 / 3, 3: 1 / 4}  # in cells
OFFSET_FRACTION: Final = 0.25  # of a cell, for extra representatives inside small regions


@frozen(eq=False)
class GridSpec:
    """Isotropic cell grid over a padded bounding box."""
    origin: np.ndarray
    h: float
    shape: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def resolution_record(self) -> dict:
        return {'cell_size': self.h, 'shape': list(self.shape)}

    @classmethod
    def covering(cls, lo: np.ndarray, hi: np.ndarray, resolution: Optional[int] = None,
                 padding: int = PADDING_CELLS) -> GridSpec:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        d = lo.shape[0]
        resolution = resolution or DEFAULT_RESOLUTION[d]
        diag = float(np.linalg.norm(hi - lo))
        if not diag > 1e-300:
            # all points coincide; any positive scale will do
            diag = max(1.0, float(np.abs(lo).max()))
        h = diag / resolution
        origin = lo - padding * h
        shape = tuple(int(n) for n in np.ceil((hi - lo) / h).astype(int) + 2 * padding + 1)
        return cls(origin=origin, h=h, shape=shape)

    def centers(self, index: np.ndarray) -> np.ndarray:
        """Cell centres of integer indices ``(k, d)``."""
        return self.origin + (np.asarray(index, dtype=float) + 0.5) * self.h

    def cell_index(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Integer cell indices of points and a mask of points that fall inside the grid."""
        idx = np.floor((np.atleast_2d(points) - self.origin) / self.h).astype(np.int64)
        inside = np.all((idx >= 0) & (idx < np.asarray(self.shape)), axis=1)
        return idx, inside


# ----- rasterisation -----
def _segment_samples(points: np.ndarray, spacing: float) -> np.ndarray:
    a, b = points[:, 0], points[:, 1]
    counts = np.ceil(np.linalg.norm(b - a, axis=1) / spacing).astype(np.int64) + 1
    out = []
    for n in np.unique(counts):
        sel = counts == n
        t = np.linspace(0.0, 1.0, int(n) + 1)
        out.append((a[sel, None, :] + t[None, :, None] * (b[sel] - a[sel])[:, None, :]).reshape(-1, a.shape[1]))
    return np.concatenate(out) if out else np.zeros((0, points.shape[2]))


def _triangle_samples(points: np.ndarray, spacing: float) -> np.ndarray:
    a, b, c = points[:, 0], points[:, 1], points[:, 2]
    longest = np.max(np.stack([np.linalg.norm(b - a, axis=1),
                               np.linalg.norm(c - b, axis=1),
                               np.linalg.norm(a - c, axis=1)]), axis=0)
    counts = np.ceil(longest / spacing).astype(np.int64) + 1
    out = []
    for n in np.unique(counts):
        n = int(n)
        sel = counts == n
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing='ij')
        keep = (i + j) <= n
        s = (i[keep] / n)[None, :, None]
        t = (j[keep] / n)[None, :, None]
        pts = a[sel, None, :] + s * (b[sel] - a[sel])[:, None, :] + t * (c[sel] - a[sel])[:, None, :]
        out.append(pts.reshape(-1, 3))
    return np.concatenate(out) if out else np.zeros((0, 3))


def rasterize(grid: GridSpec, facet_points: np.ndarray) -> np.ndarray:
    """
    Mark every cell met by a facet.

    :param facet_points: ``(b, d, d)`` facet vertex coordinates (segments in 2D, triangles in 3D)
    :return: boolean array of ``grid.shape``, True where blocked
    """
    blocked = np.zeros(grid.shape, dtype=bool)
    if facet_points.shape[0] == 0:
        return blocked
    spacing = SAMPLE_SPACING[grid.dim] * grid.h
    samples = _segment_samples(facet_points, spacing) if grid.dim == 2 else _triangle_samples(facet_points, spacing)
    idx, inside = grid.cell_index(samples)
    idx = idx[inside]
    blocked[tuple(idx.T)] = True
    return blocked


# ----- labelling -----
@frozen(eq=False)
class RegionGrid:
    """
    Connected regions of the unblocked cells.

    Label 0 marks blocked cells; label 1 is always the unbounded region.
    """
    grid: GridSpec
    labels: np.ndarray
    regions: tuple[int, ...]  # classified regions, unbounded first
    slivers: tuple[int, ...]
    representatives: dict  # label -> (k, d) points
    clearance: dict  # label -> max clearance in length units
    cell_counts: dict  # label -> number of cells

    unbounded: int = 1

    @property
    def bounded(self) -> tuple[int, ...]:
        return tuple(r for r in self.regions if r != self.unbounded)

    def measure(self, label: int) -> float:
        return self.cell_counts.get(label, 0) * self.grid.h ** self.grid.dim

    def region_of(self, points: np.ndarray) -> np.ndarray:
        """Region label of each point; points outside the grid are in the unbounded region."""
        idx, inside = self.grid.cell_index(points)
        out = np.full(idx.shape[0], self.unbounded, dtype=np.int64)
        if np.any(inside):
            out[inside] = self.labels[tuple(idx[inside].T)]
        return out


def _spread_representatives(points: np.ndarray, clearance: np.ndarray, count: int) -> np.ndarray:
    order = np.lexsort((np.arange(len(clearance)), -clearance))
    chosen = [order[0]]
    min_dist = np.linalg.norm(points - points[order[0]], axis=1)
    while len(chosen) < min(count, len(points)):
        nxt = int(np.argmax(min_dist))
        if min_dist[nxt] <= 0.0:
            break
        chosen.append(nxt)
        min_dist = np.minimum(min_dist, np.linalg.norm(points - points[nxt], axis=1))
    return points[chosen]


def _offset_points(grid: GridSpec, centers: np.ndarray, clearance: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cell centres plus points a quarter cell off them along each axis; all stay inside their cells."""
    steps = OFFSET_FRACTION * grid.h * np.concatenate([np.eye(grid.dim), -np.eye(grid.dim)])
    shifted = (centers[:, None, :] + steps[None]).reshape(-1, grid.dim)
    points = np.concatenate([centers, shifted])
    clear = np.concatenate([clearance, np.repeat(clearance - OFFSET_FRACTION, len(steps))])
    return points, clear


def label_regions(grid: GridSpec, blocked: np.ndarray, representatives: int = REPRESENTATIVES_PER_REGION) -> RegionGrid:
    structure = ndimage.generate_binary_structure(grid.dim, 1)
    raw, count = ndimage.label(~blocked, structure=structure)

    border = np.zeros(grid.shape, dtype=bool)
    for axis in range(grid.dim):
        index = [slice(None)] * grid.dim
        index[axis] = 0
        border[tuple(index)] = True
        index[axis] = -1
        border[tuple(index)] = True
    border_labels = np.unique(raw[border & (raw > 0)])

    # relabel: unbounded -> 1, the rest consecutively in scan order
    mapping = np.zeros(count + 1, dtype=np.int64)
    mapping[border_labels] = 1
    nxt = 2
    for lab in range(1, count + 1):
        if mapping[lab] == 0:
            mapping[lab] = nxt
            nxt += 1
    labels = mapping[raw]
    n_labels = nxt - 1

    clearance_cells = ndimage.distance_transform_edt(~blocked)
    ids = np.arange(1, n_labels + 1)
    max_clear = np.atleast_1d(ndimage.maximum(clearance_cells, labels, index=ids)) if n_labels else np.zeros(0)
    counts = np.atleast_1d(ndimage.sum(np.ones(grid.shape), labels, index=ids)) if n_labels else np.zeros(0)

    regions: list[int] = []
    slivers: list[int] = []
    reps: dict[int, np.ndarray] = {}
    clearance: dict[int, float] = {}
    cell_counts: dict[int, int] = {}
    objects = ndimage.find_objects(labels)
    for lab, mc, cnt in zip(ids, max_clear, counts):
        lab = int(lab)
        clearance[lab] = float(mc) * grid.h
        cell_counts[lab] = int(cnt)
        if lab != 1 and mc < SLIVER_CLEARANCE:
            slivers.append(lab)
            continue
        regions.append(lab)
        box = objects[lab - 1]
        local = labels[box] == lab
        local_clear = clearance_cells[box][local]
        idx = np.argwhere(local) + np.array([s.start for s in box])
        keep = local_clear >= max(min(SLIVER_CLEARANCE, mc), 0.5 * mc)
        points, point_clear = grid.centers(idx[keep]), local_clear[keep]
        if len(points) < representatives:
            points, point_clear = _offset_points(grid, points, point_clear)
        reps[lab] = _spread_representatives(points, point_clear, representatives)

    if slivers:
        logger.debug(f'{len(slivers)} sliver region(s) below {SLIVER_CLEARANCE} cells left unclassified')
    return RegionGrid(grid=grid, labels=labels, regions=tuple(regions), slivers=tuple(slivers),
                      representatives=reps, clearance=clearance, cell_counts=cell_counts)
