from .plmap import PLMap, pl_differentials, affine_differentials, cofactors, image_scale
from .algorithms import (
    Preimages, MollifierSpec, preimages, winding_numbers, boundary_distance, require_off_boundary,
    degree_regular_sum, degree_boundary, degree_integral,
)
from .field import DegreeRegion, DegreeReport, MIXED, degree_field, summarize_sigma
