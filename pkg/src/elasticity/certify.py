from __future__ import annotations
from typing import Optional
from typing_extensions import Final

import numpy as np
import shapely
from attrs import frozen

from .. import log
from ..conditions.measure import INJECTIVE_SAMPLES, check_injective_ae
from ..degree import PLMap
from ..mesh.geometry import bounding_boxes, overlapping_box_pairs, simplex_overlap_depth
from ..topology.reduced import reduced_domain
from ..verdict import ConditionVerdict
from .minimize import MinimizationRecord

logger = log.getLogger('plinv.elasticity')

PAIR_CHUNK: Final = 8192
OVERLAP_WITNESS_LIMIT: Final = 8


def image_overlaps(pmap: PLMap, simplex_mask: Optional[np.ndarray] = None) -> dict:
    """
    Pairwise test of simplex images for interior overlap (separating axes), over the non-degenerate
    simplices selected by ``simplex_mask``.
    """
    ids = np.flatnonzero(np.abs(pmap.image_volumes) > pmap.tau_vol)
    if simplex_mask is not None:
        ids = ids[simplex_mask[ids]]
    img = pmap.image_points[ids]
    pairs = overlapping_box_pairs(*bounding_boxes(img))
    witnesses = []
    overlapping = 0
    for start in range(0, pairs.shape[0], PAIR_CHUNK):
        chunk = pairs[start:start + PAIR_CHUNK]
        depth = simplex_overlap_depth(img[chunk[:, 0]], img[chunk[:, 1]])
        hit = np.flatnonzero(depth > pmap.tau_geom)
        overlapping += hit.size
        for k in hit[:OVERLAP_WITNESS_LIMIT - len(witnesses)]:
            i, j = chunk[k]
            witness = {'simplices': [int(ids[i]), int(ids[j])], 'depth': float(depth[k])}
            if pmap.dim == 2:
                common = shapely.intersection(shapely.polygons(img[i]), shapely.polygons(img[j]))
                witness.update(area=float(common.area), value=np.array(common.centroid.coords[0]))
            witnesses.append(witness)
    return {
        'injective': overlapping == 0,
        'pairs_tested': int(pairs.shape[0]),
        'overlapping_pairs': int(overlapping),
        'witnesses': witnesses,
    }


@frozen
class MinimizerCertificate:
    injective_ae: ConditionVerdict
    global_injectivity: Optional[dict]
    reduced_injectivity: Optional[dict]
    nonpositive_determinants: int

    @property
    def issued(self) -> tuple[str, ...]:
        out = []
        if self.injective_ae.holds:
            out.append('a')
        if self.global_injectivity is not None and self.global_injectivity['injective']:
            out.append('b')
        if self.reduced_injectivity is not None and self.reduced_injectivity['injective']:
            out.append('c')
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            'issued': list(self.issued),
            'injective_ae': self.injective_ae.to_dict(),
            'global_injectivity': self.global_injectivity,
            'reduced_injectivity': self.reduced_injectivity,
            'nonpositive_determinants': self.nonpositive_determinants,
        }


def certify_minimizer(record: MinimizationRecord, seed: int = 0,
                      samples: int = INJECTIVE_SAMPLES) -> MinimizerCertificate:
    """
    Certificate (a) is sampled injectivity almost everywhere. If the energy controls the outer distortion,
    or the record carries no energy model, (b) asks for no interior overlap of any two simplex images; if it
    controls only the inner distortion, (c) asks the same on the reduced domain and reports the excluded
    simplices.
    """
    pmap = record.final_map
    nonpositive = int(np.count_nonzero(pmap.determinants <= 0))
    if nonpositive:
        logger.warning(f'Certifying a map with {nonpositive} non-positive determinants')
    ae = check_injective_ae(pmap, samples, seed)
    model = record.model
    global_injectivity = reduced_injectivity = None
    if model is None or model.controls_outer_distortion():
        global_injectivity = image_overlaps(pmap)
    elif model.controls_inner_distortion():
        reduced = reduced_domain(pmap)
        reduced_injectivity = dict(image_overlaps(pmap, reduced.simplex_mask),
                                   excluded_simplices=reduced.excluded_simplices,
                                   boundary_touching_values=reduced.boundary_touching_values)
    certificate = MinimizerCertificate(injective_ae=ae, global_injectivity=global_injectivity,
                                       reduced_injectivity=reduced_injectivity,
                                       nonpositive_determinants=nonpositive)
    record.certificate = certificate
    logger.info(f'Certificates issued: {certificate.issued or "none"}')
    return certificate
