"""
Measure-theoretic conditions: the Ciarlet-Necas inequality and injectivity almost everywhere.
"""
from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np
import shapely

from .. import log
from ..degree import PLMap, preimages
from ..mesh.simplicial import SimplicialMesh
from ..verdict import ConditionVerdict, HOLDS, FAILS, INCONCLUSIVE, CNC, INJECTIVE_AE, WILSON_SE, wilson_interval

logger = log.getLogger('plinv.checker')

CNC_SAMPLES: Final = 1_000_000
INJECTIVE_SAMPLES: Final = 100_000
EXACT_TOLERANCE: Final = 1e-9  # relative
STRICT_INTERIOR: Final = 1e-12  # barycentric margin of a strictly interior hit


def sample_stream(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream]))


def coverage_counts(pmap: PLMap, points: np.ndarray, strict: float = STRICT_INTERIOR) -> np.ndarray:
    """
    Number of non-degenerate simplex images containing each point strictly in their interior.

    Points are sorted along the first axis once; every simplex then scans only the slab under its box.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    counts = np.zeros(points.shape[0], dtype=np.int64)
    regular = np.flatnonzero(np.abs(pmap.image_volumes) > pmap.tau_vol)
    if regular.size == 0 or points.shape[0] == 0:
        return counts
    order = np.argsort(points[:, 0], kind='stable')
    xs = points[order, 0]
    img = pmap.image_points[regular]
    base = img[:, 0]
    inverse = np.linalg.inv(np.swapaxes(img[:, 1:] - img[:, :1], 1, 2))
    lo, hi = img.min(axis=1), img.max(axis=1)
    start = np.searchsorted(xs, lo[:, 0], side='left')
    stop = np.searchsorted(xs, hi[:, 0], side='right')
    for k in range(regular.size):
        if start[k] >= stop[k]:
            continue
        idx = order[start[k]:stop[k]]
        cand = points[idx]
        box = np.all((cand >= lo[k]) & (cand <= hi[k]), axis=1)
        idx, cand = idx[box], cand[box]
        if idx.size == 0:
            continue
        lam = (cand - base[k]) @ inverse[k].T
        inside = np.all(lam > strict, axis=1) & (1.0 - lam.sum(axis=1) > strict)
        counts[idx[inside]] += 1
    return counts


def _bbox_volume(lo: np.ndarray, hi: np.ndarray) -> float:
    return float(np.prod(hi - lo))


def exact_image_area(pmap: PLMap) -> float:
    """Area of the union of the image triangles of a planar map."""
    regular = np.abs(pmap.image_volumes) > pmap.tau_vol
    if not np.any(regular):
        return 0.0
    return float(shapely.union_all(shapely.polygons(pmap.image_points[regular])).area)


def multiplicity_witness(pmap: PLMap, candidates: np.ndarray) -> Optional[dict]:
    """The first candidate value with at least two strictly interior preimages in non-degenerate simplices."""
    for z in np.atleast_2d(candidates):
        found = preimages(pmap, z)
        regular = ~found.degenerate
        lam = found.barycentric[regular]
        strict = np.all(lam > STRICT_INTERIOR, axis=1) if lam.size else np.zeros(0, dtype=bool)
        if np.count_nonzero(strict) >= 2:
            return {
                'value': z,
                'preimage_count': int(np.count_nonzero(strict)),
                'preimages': found.points[regular][strict],
                'simplices': found.simplices[regular][strict],
            }
    return None


def _double_cover_witness(pmap: PLMap, samples: Optional[np.ndarray], counts: Optional[np.ndarray]) -> Optional[dict]:
    if samples is not None and np.any(counts >= 2):
        witness = multiplicity_witness(pmap, samples[np.flatnonzero(counts >= 2)[:16]])
        if witness is not None:
            return witness
    centroids = pmap.image_points.mean(axis=1)
    multi = np.flatnonzero(coverage_counts(pmap, centroids) >= 2)
    return multiplicity_witness(pmap, centroids[multi[:16]]) if multi.size else None


def check_CNC(pmap: PLMap, samples: int = CNC_SAMPLES, seed: int = 0,
              A: Optional[SimplicialMesh] = None) -> ConditionVerdict:
    """
    ``int det(grad y) <= measure(y(A))``.

    The left side is exact. The right side is the exact union area in 2D and a Monte Carlo estimate with a
    Wilson band of three standard errors otherwise; in 2D the estimate is reported as a cross-check.
    """
    local = pmap.restrict(A)
    lhs = float(local.image_volumes.sum())
    negative = int(np.count_nonzero(local.determinants < 0))
    if negative:
        logger.warning(f'CNC evaluated on a map with {negative} negative determinants')
    resolution_record = {'seed': seed, 'samples': samples, 'wilson_se': WILSON_SE}
    evidence: dict = {'lhs': lhs, 'negative_determinants': negative}

    sample_points = counts = None
    if samples > 0:
        lo, hi = local.image_bbox
        volume = _bbox_volume(lo, hi)
        sample_points = sample_stream(seed, 0xC1C).uniform(lo, hi, size=(samples, local.dim))
        counts = coverage_counts(local, sample_points)
        hits = int(np.count_nonzero(counts))
        p_lo, p_hi = wilson_interval(hits, samples)
        evidence['monte_carlo'] = {
            'estimate': volume * hits / samples,
            'interval': [volume * p_lo, volume * p_hi],
            'hits': hits,
        }

    if local.dim == 2:
        rhs = exact_image_area(local)
        slack = rhs - lhs
        tol = EXACT_TOLERANCE * max(abs(lhs), rhs, local.tau_vol)
        evidence.update(rhs=rhs, slack=slack, method='exact-union', ratio=lhs / rhs if rhs > 0 else None)
        verdict = HOLDS if slack >= -tol else FAILS
    elif samples > 0:
        interval = evidence['monte_carlo']['interval']
        rhs = evidence['monte_carlo']['estimate']
        evidence.update(rhs=rhs, slack=rhs - lhs, method='monte-carlo', ratio=lhs / rhs if rhs > 0 else None)
        if lhs <= interval[0]:
            verdict = HOLDS
        elif lhs > interval[1]:
            verdict = FAILS
        else:
            verdict = INCONCLUSIVE
    else:
        evidence.update(method='none', reason='no samples for a 3D image measure')
        return ConditionVerdict(CNC, INCONCLUSIVE, evidence, resolution_record)

    if verdict == FAILS:
        witness = _double_cover_witness(local, sample_points, counts)
        if witness is not None:
            evidence['witness'] = witness
    return ConditionVerdict(CNC, verdict, evidence, resolution_record)


def check_injective_ae(pmap: PLMap, samples: int = INJECTIVE_SAMPLES, seed: int = 0) -> ConditionVerdict:
    """
    Count strictly interior preimages at uniform samples of the image bounding box.

    A sample with two such preimages lies in an open set covered twice, so it is a definite witness.
    The area formula ``int |det| = int #preimages`` is cross-checked on the same samples.
    """
    lo, hi = pmap.image_bbox
    volume = _bbox_volume(lo, hi)
    points = sample_stream(seed, 0x1AE).uniform(lo, hi, size=(samples, pmap.dim))
    counts = coverage_counts(pmap, points)
    inside = int(np.count_nonzero(counts >= 1))
    multi = np.flatnonzero(counts >= 2)
    resolution_record = {'seed': seed, 'samples': samples, 'wilson_se': WILSON_SE}

    integral = float(np.abs(pmap.image_volumes[np.abs(pmap.image_volumes) > pmap.tau_vol]).sum())
    estimate = volume * float(counts.sum()) / samples
    area_formula = {
        'integral': integral,
        'estimate': estimate,
        'relative_error': abs(estimate - integral) / integral if integral > 0 else None,
    }
    if inside == 0:
        return ConditionVerdict(INJECTIVE_AE, INCONCLUSIVE, {'reason': 'no sample inside the image',
                                                             'area_formula': area_formula}, resolution_record)
    if multi.size:
        witness = multiplicity_witness(pmap, points[multi[:16]])
        if witness is not None:
            return ConditionVerdict(INJECTIVE_AE, FAILS, {
                'witness': witness,
                'multi_fraction': multi.size / inside,
                'area_formula': area_formula,
            }, resolution_record)
        return ConditionVerdict(INJECTIVE_AE, INCONCLUSIVE, {
            'reason': 'multiply covered samples without a confirmed preimage pair',
            'multi_fraction': multi.size / inside,
            'area_formula': area_formula,
        }, resolution_record)
    _, upper = wilson_interval(0, inside)
    return ConditionVerdict(INJECTIVE_AE, HOLDS, {
        'inside_samples': inside,
        'multi_fraction_upper': upper,
        'area_formula': area_formula,
    }, resolution_record)
