"""k-potentials, equilibrium distributions and forces for radial and voxel conductors."""

from ._core import (
    Ball,
    BallClosedForm,
    EquilibriumSolution,
    Error,
    NestedShells,
    PairModel,
    VoxelSet,
    ball_closed_form,
    capacity,
    collision_balance,
    gradient_force,
    interior_force_ratio,
    k_upper_bound,
    make_ball_mask,
    make_pair_model,
    nested_spheres_charges,
    pair_parameter_t,
    poincare_constant,
    restoring_force,
    run_suite,
    solve_equilibrium,
    solve_voxel_equilibrium,
    threshold_energy,
    validate_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
