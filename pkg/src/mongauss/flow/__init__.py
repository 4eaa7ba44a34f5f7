"""Deterministic large-N flows: models, integration, fixed points, sweeps."""

from .integrate import FlowIntegrationError, FlowResult, integrate, integrate_mean_field
from .kerr import kerr_covariance_rhs, kerr_mean_field_rhs, kerr_rhs
from .models import CollectiveSpinModel, KerrLatticeModel, bose_hubbard_dimer, single_kerr
from .spin import (
    SpinFrame,
    SpinSteadyState,
    spin_cartesian_rhs,
    spin_coefficients,
    spin_rhs,
    spin_steady_state,
)
from .steady import (
    BranchPoint,
    FixedPoint,
    SweepResult,
    covariance_fixed_point,
    find_fixed_points,
    sweep_bifurcation,
    symmetric_branch_mean_field,
)

__all__ = [
    "FlowIntegrationError",
    "FlowResult",
    "integrate",
    "integrate_mean_field",
    "kerr_covariance_rhs",
    "kerr_mean_field_rhs",
    "kerr_rhs",
    "CollectiveSpinModel",
    "KerrLatticeModel",
    "bose_hubbard_dimer",
    "single_kerr",
    "SpinFrame",
    "SpinSteadyState",
    "spin_cartesian_rhs",
    "spin_coefficients",
    "spin_rhs",
    "spin_steady_state",
    "BranchPoint",
    "FixedPoint",
    "SweepResult",
    "covariance_fixed_point",
    "find_fixed_points",
    "sweep_bifurcation",
    "symmetric_branch_mean_field",
]
