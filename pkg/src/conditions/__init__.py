from .degree_conditions import check_DEG1, check_DEG1_loc, check_INV
from .measure import check_CNC, check_injective_ae, coverage_counts, exact_image_area, multiplicity_witness
from .boundary import (
    AIBCertificate, BoundaryInjectivity, boundary_injectivity, check_AIB, check_AIB_loc, check_AI,
)
from .densities import (
    PolynomialDensity, RadialBumpDensity, ChangeOfVariables, change_of_variables_check, pullback_integral, exact_degree,
)
from .ledger import (
    SigmaReport, LedgerEntry, LedgerReport, verify_sigma_theorem, run_checks, ledger_entry, cross_equivalences,
)
