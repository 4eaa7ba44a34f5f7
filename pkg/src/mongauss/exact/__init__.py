"""Finite-size exact stochastic trajectories and benchmark utilities."""

from .dicke import (
    all_down_state,
    collective_spin_matrices,
    dicke_dimension,
    dicke_half_entropy,
    plus_x_state,
    spin_operators,
)
from .ensemble import EnsembleError, EnsembleStats, KerrEnsembleTask, SpinEnsembleTask, ensemble_run
from .fock import (
    coherent_state,
    default_cutoff,
    destroy,
    dimer_fock_operators,
    kerr_fock_operators,
    leakage,
)
from .gaussianref import (
    gaussian_reference_state,
    non_gaussianity,
    non_gaussianity_pure,
    reference_parameters,
)
from .moments import apply_destroy, mean_number, measure_moments, single_mode_moments
from .trajectories import (
    CutoffLeakageError,
    TrajectoryResult,
    evolve_diffusive,
    evolve_diffusive_batch,
    evolve_qj,
)

__all__ = [
    "all_down_state",
    "collective_spin_matrices",
    "dicke_dimension",
    "dicke_half_entropy",
    "plus_x_state",
    "spin_operators",
    "EnsembleError",
    "EnsembleStats",
    "KerrEnsembleTask",
    "SpinEnsembleTask",
    "ensemble_run",
    "coherent_state",
    "default_cutoff",
    "destroy",
    "dimer_fock_operators",
    "kerr_fock_operators",
    "leakage",
    "gaussian_reference_state",
    "non_gaussianity",
    "non_gaussianity_pure",
    "reference_parameters",
    "apply_destroy",
    "mean_number",
    "measure_moments",
    "single_mode_moments",
    "CutoffLeakageError",
    "TrajectoryResult",
    "evolve_diffusive",
    "evolve_diffusive_batch",
    "evolve_qj",
]
