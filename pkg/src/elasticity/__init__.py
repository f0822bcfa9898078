from .energy import (
    INFINITE, Box, EnergyModel, DistortionField, energy_density, distortions, total_energy, energy_gradient,
    scaled_translate,
)
from .minimize import Deg1Loc, CNCPenalty, MinimizationRecord, minimize, constraint_by_name, determinant_step_limit
from .certify import MinimizerCertificate, certify_minimizer, image_overlaps
