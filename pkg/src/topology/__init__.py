from .images import (
    RegionSet, LocalizedImage, EmptyInteriorCheck, topological_image, localized_image, map_grid,
    check_image_monotonicity, check_image_identity, image_has_empty_interior,
)
from .preimage import (
    PreimagePiece, PreimageComponent, IsolatedComponent, preimage_components, isolate_component, refined_map,
)
from .reduced import (
    ReducedDomain, reduced_domain, boundary_preimage_mask, check_strictly_orientation_preserving, restrict_check,
)
from .report import TopologyReport, topology_report
