"""The four grid-based solvers: marker particles (MP), level set (LS),
FLIP, and APIC.

All share the same substep skeleton: move the surface representation,
reclassify cells, advance the grid velocity, add body forces, project
to divergence free, and extrapolate velocity into the air so the next
advection has valid samples. They differ only in how the surface is
tracked and how velocity moves between particles and grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.grid import CellFlag, MacGrid, NumericalFailure
from ..core.particles import Box, ParticleSet
from ..core.scenario import ScenarioConfig, build_scenario, wave_tank_motion
from ..core.timestep import EULERIAN_CFL, FRAME_DT, cfl_timestep
from .advect import (
    _component_points,
    advect_points_rk2,
    advect_velocity_semilagrangian,
    extrapolate_velocity,
    faces_adjacent_to_fluid,
)
from .levelset import REINIT_EVERY, LevelSetField
from .pressure import PCG_MAX_ITER, PCG_TOL, PressureSolveStats, divergence, pressure_project
from .transfers import FLIP_ALPHA, apic_update, flip_update, particles_to_grid

EULERIAN_METHODS = ("mp", "ls", "flip", "apic")


@dataclass
class EulerianParams:
    flip_alpha: float = FLIP_ALPHA
    pcg_tol: float = PCG_TOL
    pcg_max_iter: int = PCG_MAX_ITER
    extrapolation_iters: int = 8
    reinit_every: int = REINIT_EVERY
    cfl: float = EULERIAN_CFL
    check_divergence: bool = False  # assert the post-projection bound every substep


@dataclass
class EulerianState:
    method: str
    config: ScenarioConfig
    grid: MacGrid
    particles: ParticleSet | None = None
    levelset: LevelSetField | None = None
    params: EulerianParams = field(default_factory=EulerianParams)
    time: float = 0.0
    substep_index: int = 0
    frame_index: int = 0
    last_stats: PressureSolveStats | None = None

    def max_speed(self) -> float:
        speeds = [self.grid.max_speed()]
        if self.particles is not None and self.particles.count:
            speeds.append(self.particles.max_speed())
        return max(speeds)

    def fluid_volume(self) -> float:
        """Tracked liquid volume: particle count based for particle
        methods, integrated phi<0 for the level set."""
        if self.method == "ls":
            return self.levelset.volume()
        return self.particles.count * self.config.particle_spacing**3


def make_state(method: str, config: ScenarioConfig, params: EulerianParams | None = None):
    if method not in EULERIAN_METHODS:
        raise ValueError(f"unknown Eulerian method {method!r}")
    grid, particles = build_scenario(config)
    state = EulerianState(
        method=method,
        config=config,
        grid=grid,
        params=params or EulerianParams(),
    )
    if method == "ls":
        state.levelset = LevelSetField.for_grid(grid)
        state.levelset.initialize_from_box(config.water_region)
        state.levelset.seed_markers(config.rng_seed)
        state.grid.cell_flags = state.levelset.fluid_flags(grid)
    else:
        state.particles = particles
        if method == "apic":
            state.particles.ensure_affine()
    return state


def flags_from_positions(grid: MacGrid, positions: np.ndarray) -> np.ndarray:
    """A cell is FLUID iff it contains at least one marker/particle."""
    nx, ny, nz = grid.dims
    flags = np.where(
        grid.cell_flags == CellFlag.SOLID, CellFlag.SOLID, CellFlag.AIR
    ).astype(np.int8)
    if len(positions):
        cells = np.floor(positions / grid.cell_size).astype(np.int64)
        cells = np.clip(cells, 0, np.array([nx, ny, nz]) - 1)
        flat = (cells[:, 0] * ny + cells[:, 1]) * nz + cells[:, 2]
        count = np.bincount(flat, minlength=nx * ny * nz).reshape(nx, ny, nz)
        flags[(count > 0) & (flags != CellFlag.SOLID)] = CellFlag.FLUID
    return flags


def resolve_particle_collisions(
    positions: np.ndarray,
    velocities: np.ndarray | None,
    grid: MacGrid,
    obstacle: Box | None,
):
    """Clamp into the domain and push out of the obstacle; kill the
    velocity component pointing into the surface that was hit."""
    margin = 1e-4 * grid.cell_size
    extent = grid.extent
    for axis in range(3):
        low = positions[:, axis] < margin
        high = positions[:, axis] > extent[axis] - margin
        positions[low, axis] = margin
        positions[high, axis] = extent[axis] - margin
        if velocities is not None:
            velocities[low, axis] = np.maximum(velocities[low, axis], 0.0)
            velocities[high, axis] = np.minimum(velocities[high, axis], 0.0)
    if obstacle is not None and len(positions):
        inside = obstacle.contains(positions)
        if inside.any():
            pts = positions[inside]
            dist_lo = pts - obstacle.lo
            dist_hi = obstacle.hi - pts
            push_axis = np.argmin(np.minimum(dist_lo, dist_hi), axis=1)
            for axis in range(3):
                sel = push_axis == axis
                if not sel.any():
                    continue
                go_low = dist_lo[sel, axis] < dist_hi[sel, axis]
                coord = np.where(
                    go_low,
                    obstacle.lo[axis] - margin,
                    obstacle.hi[axis] + margin,
                )
                pts[sel, axis] = coord
            positions[inside] = pts
            if velocities is not None:
                velocities[inside] = 0.0
    return positions, velocities


def apply_body_forces(state: EulerianState, dt: float):
    """Gravity, or the rocking-tank frame forces for the wave scenario."""
    grid = state.grid
    cfg = state.config
    if cfg.motion is None or cfg.motion.amplitude_rad == 0.0:
        gx, gy, gz = cfg.gravity
        if gx:
            grid.u += gx * dt
        if gy:
            grid.v += gy * dt
        if gz:
            grid.w += gz * dt
        return
    frame = wave_tank_motion(state.time, cfg.motion, cfg.gravity)
    for axis, name in enumerate(("u", "v", "w")):
        arr = getattr(grid, name)
        pts = _component_points(arr.shape, name, grid.cell_size)
        force = frame.body_force(pts)[:, axis].reshape(arr.shape)
        setattr(grid, name, arr + force * dt)


def _project_and_extrapolate(state: EulerianState, dt: float):
    grid = state.grid
    grid.enforce_wall_faces()  # the projected system includes wall BCs
    pre = divergence(grid)
    grid, stats = pressure_project(
        grid, dt, tol=state.params.pcg_tol, max_iter=state.params.pcg_max_iter
    )
    state.last_stats = stats
    if state.params.check_divergence:
        post = divergence(grid)
        pre_norm = float(np.linalg.norm(pre))
        post_norm = float(np.linalg.norm(post))
        if pre_norm > 1e-12 and post_norm / pre_norm > 1e-4:
            raise AssertionError(
                f"divergence bound violated: {post_norm:.3e} / {pre_norm:.3e}"
            )
    valid = faces_adjacent_to_fluid(grid.fluid_mask())
    extrapolate_velocity(grid, *valid, iterations=state.params.extrapolation_iters)
    grid.enforce_wall_faces()
    if not np.isfinite(grid.u).all() or not np.isfinite(grid.v).all():
        raise NumericalFailure("grid velocity went non-finite", frame=state.frame_index)


def step_mp(state: EulerianState, dt: float) -> EulerianState:
    """Marker particles: markers only define where the fluid is."""
    ps = state.particles
    ps.positions = advect_points_rk2(ps.positions, state.grid, dt)
    resolve_particle_collisions(ps.positions, None, state.grid, state.config.obstacle)
    state.grid.cell_flags = flags_from_positions(state.grid, ps.positions)
    moved = advect_velocity_semilagrangian(state.grid, dt)
    state.grid.u, state.grid.v, state.grid.w = moved.u, moved.v, moved.w
    apply_body_forces(state, dt)
    _project_and_extrapolate(state, dt)
    _finish_substep(state, dt)
    return state


def step_ls(state: EulerianState, dt: float) -> EulerianState:
    """Level-set surface tracking on the doubled-resolution field."""
    ls = state.levelset
    ls.advect(state.grid, dt)
    if (state.substep_index + 1) % state.params.reinit_every == 0:
        ls.reinitialize()
    state.grid.cell_flags = ls.fluid_flags(state.grid)
    moved = advect_velocity_semilagrangian(state.grid, dt)
    state.grid.u, state.grid.v, state.grid.w = moved.u, moved.v, moved.w
    apply_body_forces(state, dt)
    _project_and_extrapolate(state, dt)
    _finish_substep(state, dt)
    return state


def _step_hybrid(state: EulerianState, dt: float, use_affine: bool) -> EulerianState:
    ps = state.particles
    state.grid.cell_flags = flags_from_positions(state.grid, ps.positions)
    valid = particles_to_grid(ps, state.grid, use_affine=use_affine)
    extrapolate_velocity(state.grid, *valid, iterations=state.params.extrapolation_iters)
    state.grid.enforce_wall_faces()
    grid_old = state.grid.copy()
    apply_body_forces(state, dt)
    _project_and_extrapolate(state, dt)
    if use_affine:
        apic_update(ps, state.grid)
    else:
        flip_update(ps, state.grid, grid_old, alpha=state.params.flip_alpha)
    ps.positions = advect_points_rk2(ps.positions, state.grid, dt)
    resolve_particle_collisions(ps.positions, ps.velocities, state.grid,
                                state.config.obstacle)
    _finish_substep(state, dt)
    return state


def step_flip(state: EulerianState, dt: float) -> EulerianState:
    """FLIP: particles carry velocity; grid change is blended back."""
    return _step_hybrid(state, dt, use_affine=False)


def step_apic(state: EulerianState, dt: float) -> EulerianState:
    """APIC: like FLIP but with per-particle affine velocity matrices."""
    return _step_hybrid(state, dt, use_affine=True)


def _finish_substep(state: EulerianState, dt: float):
    state.time += dt
    state.substep_index += 1


STEP_FUNCTIONS = {
    "mp": step_mp,
    "ls": step_ls,
    "flip": step_flip,
    "apic": step_apic,
}


def step(state: EulerianState, dt: float) -> EulerianState:
    return STEP_FUNCTIONS[state.method](state, dt)


def advance_frame(state: EulerianState, frame_dt: float = FRAME_DT) -> EulerianState:
    """Adaptive substeps to exactly one frame boundary."""
    t = 0.0
    try:
        while t < frame_dt - 1e-12:
            dt = cfl_timestep(state.max_speed(), state.grid.cell_size,
                              state.params.cfl, frame_dt)
            dt = min(dt, frame_dt - t)
            step(state, dt)
            t += dt
    except NumericalFailure as exc:
        if exc.frame is None:
            raise NumericalFailure(str(exc), frame=state.frame_index) from exc
        raise
    state.frame_index += 1
    return state
