from .frames import (
    read_levelset,
    read_particle_frame,
    write_levelset,
    write_particle_frame,
    write_particles_csv,
)
from .grid import CellFlag, MacGrid, NumericalFailure, sample_component, scatter_component
from .kernels import SphKernel
from .neighbors import NeighborGrid, brute_force_query
from .particles import Box, ParticleSet
from .scenario import (
    DAM_BASE_DIMS,
    GRAVITY,
    WATER_DENSITY,
    WAVE_BASE_DIMS,
    ScenarioConfig,
    TankFrameForces,
    TankMotion,
    build_scenario,
    dam_config,
    scale_dims,
    wave_config,
    wave_tank_motion,
)
from .timestep import (
    DT_MIN,
    EULERIAN_CFL,
    FRAME_DT,
    SPH_CFL,
    cfl_timestep,
    substeps_for_frame,
)

__all__ = [
    "Box",
    "CellFlag",
    "DAM_BASE_DIMS",
    "DT_MIN",
    "EULERIAN_CFL",
    "FRAME_DT",
    "GRAVITY",
    "MacGrid",
    "NeighborGrid",
    "NumericalFailure",
    "ParticleSet",
    "SPH_CFL",
    "ScenarioConfig",
    "SphKernel",
    "TankFrameForces",
    "TankMotion",
    "WATER_DENSITY",
    "WAVE_BASE_DIMS",
    "brute_force_query",
    "build_scenario",
    "cfl_timestep",
    "dam_config",
    "read_levelset",
    "read_particle_frame",
    "sample_component",
    "scale_dims",
    "scatter_component",
    "substeps_for_frame",
    "wave_config",
    "wave_tank_motion",
    "write_levelset",
    "write_particle_frame",
    "write_particles_csv",
]
