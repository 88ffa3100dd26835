"""Fair allocation of chores under restricted additive costs."""

from chorealloc.allocate import (
    ALGORITHMS,
    ModificationLog,
    SolveTrace,
    phase2_assign_zeros,
    phase3_assign_bundles,
    solve,
    solve_ef1_mms_po,
    solve_efx_mms,
    solve_efx_mms_poly,
)
from chorealloc.errors import BudgetExceeded, InstanceError
from chorealloc.model import (
    Allocation,
    Instance,
    bundle_cost,
    c_bar,
    c_hat,
    classify,
    make_instance,
    validate_instance,
)

__all__ = [
    "ALGORITHMS",
    "Allocation",
    "BudgetExceeded",
    "Instance",
    "InstanceError",
    "ModificationLog",
    "SolveTrace",
    "bundle_cost",
    "c_bar",
    "c_hat",
    "classify",
    "make_instance",
    "phase2_assign_zeros",
    "phase3_assign_bundles",
    "solve",
    "solve_ef1_mms_po",
    "solve_efx_mms",
    "solve_efx_mms_poly",
    "validate_instance",
]
