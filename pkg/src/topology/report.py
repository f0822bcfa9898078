from __future__ import annotations
from typing import Optional

import numpy as np
from attrs import frozen

from .. import log
from ..degree import PLMap
from ..errors_collection import EmptyPreimage
from ..mesh.covering import InnerCovering
from .images import RegionSet, LocalizedImage, topological_image, localized_image, check_image_monotonicity
from .preimage import PreimageComponent, preimage_components
from .reduced import ReducedDomain, reduced_domain

logger = log.getLogger('plinv.topology')


@frozen(eq=False)
class TopologyReport:
    im_T: RegionSet
    im_loc: LocalizedImage
    reduced_domain: ReducedDomain
    monotonicity_witnesses: list
    preimage: Optional[PreimageComponent] = None

    @property
    def boundary_touching_values(self) -> np.ndarray:
        return self.reduced_domain.boundary_touching_values

    def to_dict(self) -> dict:
        return {
            'im_T': self.im_T.to_dict(),
            'im_loc': self.im_loc.to_dict(),
            'reduced_domain': self.reduced_domain.to_dict(),
            'boundary_touching_values': self.boundary_touching_values,
            'monotonicity_witnesses': self.monotonicity_witnesses,
            'preimage': self.preimage.to_dict() if self.preimage is not None else None,
        }


def topology_report(pmap: PLMap, covering: InnerCovering, resolution: Optional[int] = None,
                    query=None, eta: Optional[float] = None) -> TopologyReport:
    """Topological and localized images, the reduced domain and, for a ``query`` value, its preimage pieces."""
    preimage = None
    if query is not None:
        try:
            preimage = preimage_components(pmap, query, eta)
        except EmptyPreimage as e:
            logger.info(f'No preimage pieces: {e}')
    witnesses = check_image_monotonicity(pmap, covering, resolution)
    if witnesses:
        logger.warning(f'{len(witnesses)} representatives break the monotonicity of the images over the levels')
    return TopologyReport(
        im_T=topological_image(pmap, None, resolution),
        im_loc=localized_image(pmap, covering, resolution),
        reduced_domain=reduced_domain(pmap),
        monotonicity_witnesses=witnesses,
        preimage=preimage,
    )
