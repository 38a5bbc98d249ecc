"""Benchmark scenario definitions and initial-state construction.

Two standardized setups:

* `dam`: a 3.22 x 1 x 1 m tank with an open roof, a 1.23 x 0.55 x 1.0 m
  water column at one end and a 0.16 x 0.16 x 0.4 m obstacle on the
  floor in its path. The simulation grid extends well above the tank
  rim so splashes have headroom (the vertical extent is about 3 m).
* `wave`: a shallow 0.9 x 0.51 x 0.062 m tank filled to 0.093 m,
  periodically rocked about an axis through the bottom center. The
  motion is applied as non-inertial frame forces.

Grids are cubic-celled; per scale factor s the dam uses (80, 75, 25)*s
cells and the wave (75, 42, 5)*s. Water is seeded with 8 particles per
cell (a half-cell lattice), uniform for Lagrangian runs and jittered
for Eulerian ones to avoid aliasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import CellFlag, MacGrid
from .particles import Box, ParticleSet

WATER_DENSITY = 1000.0  # kg/m^3
GRAVITY = (0.0, -9.81, 0.0)

DAM_BASE_DIMS = (80, 75, 25)
WAVE_BASE_DIMS = (75, 42, 5)
DAM_TANK = (3.22, 1.0, 1.0)
WAVE_TANK = (0.9, 0.51, 0.062)

# placeholder rocking parameters pending the benchmark case sheet;
# override via ScenarioConfig.motion
DEFAULT_WAVE_AMPLITUDE_RAD = 0.07
DEFAULT_WAVE_PERIOD_S = 1.9


@dataclass(frozen=True)
class TankMotion:
    """Sinusoidal rocking: angle(t) = amplitude * sin(2 pi t / period)."""

    amplitude_rad: float
    period_s: float
    axis_point: tuple[float, float, float]
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not self.period_s > 0:
            raise ValueError("motion period must be positive")

    def angle(self, t: float) -> float:
        return self.amplitude_rad * math.sin(2.0 * math.pi * t / self.period_s)

    def angular_velocity(self, t: float) -> float:
        return (
            self.amplitude_rad
            * (2.0 * math.pi / self.period_s)
            * math.cos(2.0 * math.pi * t / self.period_s)
        )

    def angular_acceleration(self, t: float) -> float:
        return (
            -self.amplitude_rad
            * (2.0 * math.pi / self.period_s) ** 2
            * math.sin(2.0 * math.pi * t / self.period_s)
        )


@dataclass
class TankFrameForces:
    """Non-inertial body force field of the rocking tank at one instant."""

    rotation: np.ndarray       # world gravity -> tank frame
    gravity_rotated: np.ndarray
    omega: float
    alpha: float
    axis_point: np.ndarray
    axis: np.ndarray

    def body_force(self, points: np.ndarray) -> np.ndarray:
        """Acceleration (m/s^2) at tank-frame positions, shape (n, 3).

        Rotated gravity plus centrifugal and Euler terms; the
        velocity-dependent Coriolis term is not included.
        """
        points = np.atleast_2d(points)
        r = points - self.axis_point
        # component of r perpendicular to the axis
        along = r @ self.axis
        r_perp = r - along[:, None] * self.axis
        centrifugal = self.omega**2 * r_perp
        euler = -self.alpha * np.cross(np.broadcast_to(self.axis, r.shape), r)
        return self.gravity_rotated + centrifugal + euler


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = axis
    k = np.array([[0, -z, y], [z, 0, -x], [-y, x, 0]])
    return np.eye(3) * c + s * k + (1 - c) * np.outer(axis, axis)


def wave_tank_motion(t: float, motion: TankMotion, gravity=GRAVITY) -> TankFrameForces:
    """Frame forces for simulating the rocking tank in its own frame.

    At phase zero the transform is the identity and the force field
    reduces to gravity at the rotation axis; with zero amplitude it is
    exactly the static-tank field everywhere and for all times.
    """
    theta = motion.angle(t)
    rot = _axis_rotation(motion.axis, -theta)  # world -> tank frame
    g_rot = rot @ np.asarray(gravity, dtype=float)
    return TankFrameForces(
        rotation=rot,
        gravity_rotated=g_rot,
        omega=motion.angular_velocity(t),
        alpha=motion.angular_acceleration(t),
        axis_point=np.asarray(motion.axis_point, dtype=float),
        axis=np.asarray(motion.axis, dtype=float) / np.linalg.norm(motion.axis),
    )


@dataclass
class ScenarioConfig:
    name: str
    domain_size: tuple[float, float, float]
    water_region: Box
    grid_dims: tuple[int, int, int]
    obstacle: Box | None = None
    gravity: tuple[float, float, float] = GRAVITY
    motion: TankMotion | None = None
    seed_mode: str = "uniform"  # or "jittered"
    rng_seed: int = 0
    rest_density: float = WATER_DENSITY

    def __post_init__(self):
        if self.name not in ("dam", "wave"):
            raise ValueError(f"unknown scenario {self.name!r}")
        if self.seed_mode not in ("uniform", "jittered"):
            raise ValueError(f"unknown seed mode {self.seed_mode!r}")
        if any(d < 1 for d in self.grid_dims):
            raise ValueError("grid dims must be positive")
        grid_box = self.grid_box
        if not self.water_region.inside(grid_box):
            raise ValueError("water region extends outside the simulated domain")
        if self.obstacle is not None:
            if not self.obstacle.inside(grid_box):
                raise ValueError("obstacle extends outside the simulated domain")
            if self.obstacle.overlaps(self.water_region):
                raise ValueError("water region overlaps the obstacle")

    @property
    def cell_size(self) -> float:
        return self.domain_size[0] / self.grid_dims[0]

    @property
    def particle_spacing(self) -> float:
        return self.cell_size / 2.0

    @property
    def grid_box(self) -> Box:
        extent = np.asarray(self.grid_dims, dtype=float) * self.cell_size
        return Box(np.zeros(3), extent)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "domain_size": list(self.domain_size),
            "water_region": [self.water_region.lo.tolist(), self.water_region.hi.tolist()],
            "grid_dims": list(self.grid_dims),
            "gravity": list(self.gravity),
            "seed_mode": self.seed_mode,
            "rng_seed": self.rng_seed,
            "rest_density": self.rest_density,
        }
        if self.obstacle is not None:
            d["obstacle"] = [self.obstacle.lo.tolist(), self.obstacle.hi.tolist()]
        if self.motion is not None:
            d["motion"] = {
                "amplitude_rad": self.motion.amplitude_rad,
                "period_s": self.motion.period_s,
                "axis_point": list(self.motion.axis_point),
                "axis": list(self.motion.axis),
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        motion = None
        if d.get("motion"):
            m = d["motion"]
            motion = TankMotion(
                amplitude_rad=m["amplitude_rad"],
                period_s=m["period_s"],
                axis_point=tuple(m["axis_point"]),
                axis=tuple(m.get("axis", (0.0, 0.0, 1.0))),
            )
        obstacle = None
        if d.get("obstacle"):
            obstacle = Box(np.asarray(d["obstacle"][0]), np.asarray(d["obstacle"][1]))
        return cls(
            name=d["name"],
            domain_size=tuple(d["domain_size"]),
            water_region=Box(np.asarray(d["water_region"][0]), np.asarray(d["water_region"][1])),
            grid_dims=tuple(d["grid_dims"]),
            obstacle=obstacle,
            gravity=tuple(d.get("gravity", GRAVITY)),
            motion=motion,
            seed_mode=d.get("seed_mode", "uniform"),
            rng_seed=int(d.get("rng_seed", 0)),
            rest_density=float(d.get("rest_density", WATER_DENSITY)),
        )


def scale_dims(base: tuple[int, int, int], scale: float) -> tuple[int, int, int]:
    dims = tuple(int(round(b * scale)) for b in base)
    if any(d < 1 for d in dims):
        raise ValueError(f"scale {scale} collapses dims {base}")
    return dims


def _clip_box(box: Box, extent: np.ndarray) -> Box:
    # cubic cells make the grid extent differ from the tank by a
    # fraction of a cell in y/z; regions are clipped to the grid
    return Box(np.minimum(box.lo, extent), np.minimum(box.hi, extent))


def dam_config(scale: float = 1.0, dims=None, seed_mode="uniform", rng_seed=0) -> ScenarioConfig:
    dims = dims or scale_dims(DAM_BASE_DIMS, scale)
    extent = np.asarray(dims, dtype=float) * (DAM_TANK[0] / dims[0])
    return ScenarioConfig(
        name="dam",
        domain_size=DAM_TANK,
        water_region=_clip_box(Box((0.0, 0.0, 0.0), (1.23, 0.55, 1.0)), extent),
        obstacle=_clip_box(Box((2.3955, 0.0, 0.2955), (2.5555, 0.16, 0.6955)), extent),
        grid_dims=dims,
        seed_mode=seed_mode,
        rng_seed=rng_seed,
    )


def wave_config(scale: float = 1.0, dims=None, seed_mode="uniform", rng_seed=0,
                amplitude_rad=DEFAULT_WAVE_AMPLITUDE_RAD,
                period_s=DEFAULT_WAVE_PERIOD_S) -> ScenarioConfig:
    dims = dims or scale_dims(WAVE_BASE_DIMS, scale)
    extent = np.asarray(dims, dtype=float) * (WAVE_TANK[0] / dims[0])
    return ScenarioConfig(
        name="wave",
        domain_size=WAVE_TANK,
        water_region=_clip_box(Box((0.0, 0.0, 0.0), (0.9, 0.093, 0.062)), extent),
        grid_dims=dims,
        motion=TankMotion(
            amplitude_rad=amplitude_rad,
            period_s=period_s,
            axis_point=(0.45, 0.0, 0.031),
        ),
        seed_mode=seed_mode,
        rng_seed=rng_seed,
    )


def _lattice_points(box: Box, spacing: float) -> np.ndarray:
    """Cell-centered lattice of the given spacing clipped to the box."""
    axes = []
    for d in range(3):
        n = int(np.floor((box.hi[d] - box.lo[d]) / spacing + 0.5 - 1e-9)) + 1
        pts = box.lo[d] + (np.arange(n) + 0.5) * spacing
        axes.append(pts[pts < box.hi[d] - 1e-12])
    if any(len(a) == 0 for a in axes):
        return np.zeros((0, 3))
    xx, yy, zz = np.meshgrid(*axes, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=-1)


def build_scenario(config: ScenarioConfig) -> tuple[MacGrid, ParticleSet]:
    """Initial grid flags and particle seeding for a scenario.

    Water cells get 8 particles each: a uniform half-cell lattice, or
    the same lattice jittered by up to a quarter cell per axis when
    `seed_mode` is "jittered". Seeding is deterministic in `rng_seed`.
    """
    cell = config.cell_size
    grid = MacGrid(dims=tuple(config.grid_dims), cell_size=cell)

    centers = grid.cell_centers().reshape(-1, 3)
    flags = np.full(len(centers), CellFlag.AIR, dtype=np.int8)
    if config.obstacle is not None:
        flags[config.obstacle.contains(centers)] = CellFlag.SOLID
    flags[
        config.water_region.contains(centers) & (flags != CellFlag.SOLID)
    ] = CellFlag.FLUID
    grid.cell_flags = flags.reshape(grid.dims)

    positions = _lattice_points(config.water_region, config.particle_spacing)
    if config.obstacle is not None and len(positions):
        positions = positions[~config.obstacle.contains(positions)]
    if config.seed_mode == "jittered" and len(positions):
        rng = np.random.default_rng(config.rng_seed)
        positions = positions + rng.uniform(-0.25 * cell, 0.25 * cell, positions.shape)
        margin = 1e-6 * cell
        positions = np.clip(positions, margin, grid.extent - margin)

    mass = np.full(len(positions), config.rest_density * config.particle_spacing**3)
    particles = ParticleSet(
        positions=positions.reshape(-1, 3),
        velocities=np.zeros((len(positions), 3)),
        mass=mass,
    )
    return grid, particles
