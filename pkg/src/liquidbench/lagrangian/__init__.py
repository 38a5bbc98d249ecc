from .boundary import BoundaryParticleSet, build_boundary
from .hydrostatic import relax_to_hydrostatic
from .solvers import (
    LAGRANGIAN_METHODS,
    PairCache,
    SphParams,
    SphState,
    body_acceleration,
    compute_density,
    enforce_domain,
    extrapolate_boundary_pressure,
    make_sph_state,
    pressure_acceleration,
    settle,
    stable_dt,
    step,
    step_iisph,
    step_sph_wall,
    step_wcsph,
    viscosity_acceleration,
)

__all__ = [
    "BoundaryParticleSet",
    "LAGRANGIAN_METHODS",
    "PairCache",
    "SphParams",
    "SphState",
    "body_acceleration",
    "build_boundary",
    "compute_density",
    "enforce_domain",
    "extrapolate_boundary_pressure",
    "make_sph_state",
    "pressure_acceleration",
    "relax_to_hydrostatic",
    "settle",
    "stable_dt",
    "step",
    "step_iisph",
    "step_sph_wall",
    "step_wcsph",
    "viscosity_acceleration",
]
