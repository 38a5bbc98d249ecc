from .advect import (
    advect_points_rk2,
    advect_scalar_semilagrangian,
    advect_velocity_semilagrangian,
    extrapolate_component,
    extrapolate_velocity,
    faces_adjacent_to_fluid,
)
from .levelset import LevelSetField, reinitialize
from .pressure import (
    PCG_MAX_ITER,
    PCG_TOL,
    PressureSolveError,
    PressureSolveStats,
    build_system,
    dense_poisson_matrix,
    divergence,
    pressure_project,
    solve_pressure,
)
from .solvers import (
    EULERIAN_METHODS,
    EulerianParams,
    EulerianState,
    advance_frame,
    apply_body_forces,
    flags_from_positions,
    make_state,
    step,
    step_apic,
    step_flip,
    step_ls,
    step_mp,
)
from .transfers import FLIP_ALPHA, apic_update, flip_update, particles_to_grid

__all__ = [
    "EULERIAN_METHODS",
    "EulerianParams",
    "EulerianState",
    "FLIP_ALPHA",
    "LevelSetField",
    "PCG_MAX_ITER",
    "PCG_TOL",
    "PressureSolveError",
    "PressureSolveStats",
    "advance_frame",
    "advect_points_rk2",
    "advect_scalar_semilagrangian",
    "advect_velocity_semilagrangian",
    "apic_update",
    "apply_body_forces",
    "build_system",
    "dense_poisson_matrix",
    "divergence",
    "extrapolate_component",
    "extrapolate_velocity",
    "faces_adjacent_to_fluid",
    "flags_from_positions",
    "flip_update",
    "make_state",
    "particles_to_grid",
    "pressure_project",
    "reinitialize",
    "solve_pressure",
    "step",
    "step_apic",
    "step_flip",
    "step_ls",
    "step_mp",
]
