"""
Vectorised geometric predicates on stacks of simplices.

Every function takes simplices as an array of shape ``(m, k + 1, d)`` (``m`` simplices of
dimension ``k`` embedded in ``R^d``) and works on the whole stack at once.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import math
import numpy as np

_EPS: Final = 1e-300


def signed_volumes(points: np.ndarray) -> np.ndarray:
    """Signed volume of full-dimensional simplices ``(m, d + 1, d)``."""
    points = np.asarray(points, dtype=float)
    d = points.shape[-1]
    edges = points[:, 1:, :] - points[:, :1, :]
    return np.linalg.det(edges) / math.factorial(d)


def edge_matrices(points: np.ndarray) -> np.ndarray:
    """Edge matrices with columns ``p_i - p_0``; shape ``(m, d, k)``."""
    points = np.asarray(points, dtype=float)
    return np.swapaxes(points[:, 1:, :] - points[:, :1, :], 1, 2)


def barycentric(points: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Barycentric coordinates of ``z`` in full-dimensional simplices.

    :param points: ``(m, d + 1, d)``
    :param z: a single point ``(d,)`` or one point per simplex ``(m, d)``
    :return: ``(m, d + 1)``; rows of singular simplices are NaN
    """
    points = np.asarray(points, dtype=float)
    m, _, d = points.shape
    z = np.broadcast_to(np.asarray(z, dtype=float), (m, d))
    edges = edge_matrices(points)
    det = np.linalg.det(edges)
    scale = np.max(np.abs(edges), axis=(1, 2)) if m else np.zeros(0)
    ok = np.abs(det) > 1e-14 * np.maximum(scale, _EPS) ** d
    out = np.full((m, d + 1), np.nan)
    if np.any(ok):
        rhs = (z[ok] - points[ok, 0, :])[..., None]
        lam = np.linalg.solve(edges[ok], rhs)[..., 0]
        out[ok, 1:] = lam
        out[ok, 0] = 1.0 - lam.sum(axis=1)
    return out


def closest_points(points: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Closest point of each simplex hull to ``z``.

    :param points: ``(m, k + 1, d)`` with ``0 <= k <= d``
    :param z: ``(d,)`` or ``(m, d)``
    :return: ``(m, d)``
    """
    points = np.asarray(points, dtype=float)
    m, kp1, d = points.shape
    z = np.broadcast_to(np.asarray(z, dtype=float), (m, d))
    if m == 0:
        return np.zeros((0, d))
    if kp1 == 1:
        return points[:, 0, :].copy()
    if kp1 == 2:
        return _closest_on_segments(points[:, 0, :], points[:, 1, :], z)

    k = kp1 - 1
    p0 = points[:, 0, :]
    edges = points[:, 1:, :] - p0[:, None, :]  # (m, k, d)
    gram = np.einsum('mid,mjd->mij', edges, edges)
    rhs = np.einsum('mid,md->mi', edges, z - p0)
    scale = np.maximum(np.einsum('mii->m', gram), _EPS)
    ok = np.linalg.det(gram) > 1e-12 * scale ** k
    result = np.empty((m, d))
    inside = np.zeros(m, dtype=bool)
    if np.any(ok):
        lam = np.linalg.solve(gram[ok], rhs[ok][..., None])[..., 0]
        lam0 = 1.0 - lam.sum(axis=1)
        in_hull = np.all(lam >= 0.0, axis=1) & (lam0 >= 0.0)
        idx = np.flatnonzero(ok)[in_hull]
        result[idx] = p0[idx] + np.einsum('mi,mid->md', lam[in_hull], edges[idx])
        inside[idx] = True
    rest = np.flatnonzero(~inside)
    if rest.size:
        best = np.full(rest.size, np.inf)
        for j in range(kp1):
            facet = np.delete(points[rest], j, axis=1)
            candidate = closest_points(facet, z[rest])
            dist = np.linalg.norm(candidate - z[rest], axis=1)
            better = dist < best
            best[better] = dist[better]
            result[rest[better]] = candidate[better]
    return result


def simplex_distance(points: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Euclidean distance from ``z`` to each simplex hull."""
    points = np.asarray(points, dtype=float)
    if points.shape[0] == 0:
        return np.zeros(0)
    z = np.broadcast_to(np.asarray(z, dtype=float), (points.shape[0], points.shape[-1]))
    return np.linalg.norm(closest_points(points, z) - z, axis=1)


def distance_to_hull_union(points: np.ndarray, queries: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Minimum distance from each query point to a union of simplices, ``(q,)``."""
    points = np.asarray(points, dtype=float)
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    out = np.full(queries.shape[0], np.inf)
    if points.shape[0] == 0:
        return out
    for i, q in enumerate(queries):
        lo = 0
        best = np.inf
        while lo < points.shape[0]:
            best = min(best, float(simplex_distance(points[lo:lo + chunk], q).min()))
            lo += chunk
        out[i] = best
    return out


def _closest_on_segments(a: np.ndarray, b: np.ndarray, z: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = np.einsum('md,md->m', ab, ab)
    t = np.where(denom > _EPS, np.einsum('md,md->m', z - a, ab) / np.maximum(denom, _EPS), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return a + t[:, None] * ab


def segment_segment_distance(p1: np.ndarray, q1: np.ndarray, p2: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Distance between segment stacks ``[p1, q1]`` and ``[p2, q2]`` in any dimension."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum('md,md->m', d1, d1)
    e = np.einsum('md,md->m', d2, d2)
    f = np.einsum('md,md->m', d2, r)
    c = np.einsum('md,md->m', d1, r)
    b = np.einsum('md,md->m', d1, d2)
    denom = a * e - b * b
    safe_a = np.maximum(a, _EPS)
    safe_e = np.maximum(e, _EPS)

    s = np.where(denom > 1e-14 * np.maximum(a * e, _EPS), np.clip((b * f - c * e) / np.maximum(denom, _EPS), 0, 1), 0.0)
    t = (b * s + f) / safe_e
    low = t < 0.0
    high = t > 1.0
    s = np.where(low, np.clip(-c / safe_a, 0, 1), s)
    s = np.where(high, np.clip((b - c) / safe_a, 0, 1), s)
    t = np.clip(t, 0.0, 1.0)

    # degenerate segments
    a_small = a <= _EPS
    e_small = e <= _EPS
    s = np.where(a_small, 0.0, s)
    t = np.where(a_small & ~e_small, np.clip(f / safe_e, 0, 1), t)
    s = np.where(e_small & ~a_small, np.clip(-c / safe_a, 0, 1), s)
    t = np.where(e_small, 0.0, t)

    c1 = p1 + s[:, None] * d1
    c2 = p2 + t[:, None] * d2
    return np.linalg.norm(c1 - c2, axis=1)


def orient2d(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Twice the signed area of triangles ``(a, b, c)``; positive when counter-clockwise."""
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def proper_crossing_depth_2d(p1: np.ndarray, q1: np.ndarray, p2: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """
    Margin by which 2D segment pairs cross in their relative interiors.

    Zero when the pair does not cross properly. Otherwise the smallest distance from an
    endpoint of either segment to the line of the other, i.e. how far the segments can be
    moved before the crossing may disappear.
    """
    o1 = orient2d(p1, q1, p2)
    o2 = orient2d(p1, q1, q2)
    o3 = orient2d(p2, q2, p1)
    o4 = orient2d(p2, q2, q1)
    crossing = (o1 * o2 < 0) & (o3 * o4 < 0)
    len1 = np.maximum(np.linalg.norm(q1 - p1, axis=-1), _EPS)
    len2 = np.maximum(np.linalg.norm(q2 - p2, axis=-1), _EPS)
    depth = np.minimum(np.minimum(np.abs(o1), np.abs(o2)) / len1, np.minimum(np.abs(o3), np.abs(o4)) / len2)
    return np.where(crossing, depth, 0.0)


def triangle_normals(points: np.ndarray) -> np.ndarray:
    """Area vectors (half cross products) of 3D triangles ``(m, 3, 3)``."""
    return 0.5 * np.cross(points[:, 1] - points[:, 0], points[:, 2] - points[:, 0])


def segment_triangle_pierce_depth(a: np.ndarray, b: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """
    Margin by which segments ``[a, b]`` pierce 3D triangles through their interiors.

    Zero when there is no transversal piercing. Otherwise the minimum of the endpoints'
    distances to the triangle plane and the crossing point's distance to the triangle edges.
    """
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    norm = np.maximum(np.linalg.norm(n, axis=1), _EPS)
    unit = n / norm[:, None]
    da = np.einsum('md,md->m', a - tri[:, 0], unit)
    db = np.einsum('md,md->m', b - tri[:, 0], unit)
    crosses = da * db < 0
    t = np.where(crosses, da / np.where(crosses, da - db, 1.0), 0.0)
    x = a + t[:, None] * (b - a)
    edge_margin = np.full(a.shape[0], np.inf)
    inside = np.ones(a.shape[0], dtype=bool)
    for i in range(3):
        p = tri[:, i]
        q = tri[:, (i + 1) % 3]
        side = np.einsum('md,md->m', np.cross(q - p, x - p), unit)
        inside &= side > 0
        edge_margin = np.minimum(edge_margin, side / np.maximum(np.linalg.norm(q - p, axis=1), _EPS))
    ok = crosses & inside & (norm > _EPS)
    depth = np.minimum(np.minimum(np.abs(da), np.abs(db)), edge_margin)
    return np.where(ok, depth, 0.0)


def segment_triangle_distance(a: np.ndarray, b: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """Distance between 3D segments ``[a, b]`` and triangles ``(m, 3, 3)``."""
    dist = np.minimum(_point_triangle(a, tri), _point_triangle(b, tri))
    for i in range(3):
        dist = np.minimum(dist, segment_segment_distance(a, b, tri[:, i], tri[:, (i + 1) % 3]))
    pierced = _segment_hits_triangle(a, b, tri)
    return np.where(pierced, 0.0, dist)


def _point_triangle(p: np.ndarray, tri: np.ndarray) -> np.ndarray:
    return np.linalg.norm(closest_points(tri, p) - p, axis=1)


def _segment_hits_triangle(a: np.ndarray, b: np.ndarray, tri: np.ndarray) -> np.ndarray:
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    da = np.einsum('md,md->m', a - tri[:, 0], n)
    db = np.einsum('md,md->m', b - tri[:, 0], n)
    crosses = da * db <= 0
    denom = np.where(crosses & (da != db), da - db, 1.0)
    t = np.where(crosses & (da != db), da / denom, 0.0)
    x = a + t[:, None] * (b - a)
    inside = crosses & (da != db)
    for i in range(3):
        p = tri[:, i]
        q = tri[:, (i + 1) % 3]
        inside &= np.einsum('md,md->m', np.cross(q - p, x - p), n) >= 0
    return inside


def triangle_triangle_distance(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Distance between 3D triangle stacks ``(m, 3, 3)``; zero when they intersect."""
    dist = np.full(t1.shape[0], np.inf)
    for i in range(3):
        dist = np.minimum(dist, segment_triangle_distance(t1[:, i], t1[:, (i + 1) % 3], t2))
        dist = np.minimum(dist, segment_triangle_distance(t2[:, i], t2[:, (i + 1) % 3], t1))
    return dist


def bounding_boxes(points: np.ndarray, pad: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    return points.min(axis=1) - pad, points.max(axis=1) + pad


def overlapping_box_pairs(lo: np.ndarray, hi: np.ndarray, block: int = 2048,
                          lo2: Optional[np.ndarray] = None, hi2: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Index pairs ``(i, j)`` of boxes that overlap.

    With a single box set only pairs ``i < j`` are returned.
    """
    symmetric = lo2 is None
    if symmetric:
        lo2, hi2 = lo, hi
    pairs = []
    for start in range(0, lo.shape[0], block):
        stop = min(start + block, lo.shape[0])
        hit = np.all((lo[start:stop, None, :] <= hi2[None, :, :]) & (lo2[None, :, :] <= hi[start:stop, None, :]),
                     axis=2)
        i, j = np.nonzero(hit)
        i = i + start
        if symmetric:
            keep = i < j
            i, j = i[keep], j[keep]
        pairs.append(np.stack([i, j], axis=1))
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(pairs).astype(np.int64)


_SIMPLEX_EDGES: Final = {2: ((0, 1), (1, 2), (2, 0)), 3: ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))}
_TET_FACES: Final = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))


def _edges(points: np.ndarray) -> np.ndarray:
    pairs = np.array(_SIMPLEX_EDGES[points.shape[-1]])
    return points[:, pairs[:, 1]] - points[:, pairs[:, 0]]


def _separating_axes(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Face normals of both simplices, plus edge-edge cross products in 3D; ``(m, a, d)``."""
    if p.shape[-1] == 2:
        edges = np.concatenate([_edges(p), _edges(q)], axis=1)
        return np.stack([edges[..., 1], -edges[..., 0]], axis=-1)
    faces = np.array(_TET_FACES)
    normals = [triangle_normals(s[:, face]) for s in (p, q) for face in faces]
    ep, eq = _edges(p), _edges(q)
    crosses = np.cross(ep[:, :, None, :], eq[:, None, :, :]).reshape(p.shape[0], -1, 3)
    return np.concatenate([np.stack(normals, axis=1), crosses], axis=1)


def simplex_overlap_depth(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """
    Penetration depth of full-dimensional simplex pairs by the separating axis test.

    Positive exactly when the interiors intersect; zero or negative when a separating plane exists.

    :param p: ``(m, d + 1, d)``
    :param q: ``(m, d + 1, d)``
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    axes = _separating_axes(p, q)
    norms = np.linalg.norm(axes, axis=2)
    valid = norms > _EPS
    axes = axes / np.where(valid, norms, 1.0)[..., None]
    proj_p = np.einsum('mvd,mad->mav', p, axes)
    proj_q = np.einsum('mvd,mad->mav', q, axes)
    overlap = np.minimum(proj_p.max(axis=2), proj_q.max(axis=2)) - np.maximum(proj_p.min(axis=2), proj_q.min(axis=2))
    overlap = np.where(valid, overlap, np.inf)
    return overlap.min(axis=1)
