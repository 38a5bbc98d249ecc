"""Particle storage shared by all solvers.

Per-particle arrays always have matching first dimension; the optional
extras (affine matrices for APIC, density/pressure for SPH) are created
lazily by the solver that needs them. Particle count never changes over
a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ParticleSet:
    positions: np.ndarray
    velocities: np.ndarray
    mass: np.ndarray
    affine: np.ndarray | None = None      # (n, 3, 3) APIC velocity gradient C_p
    density: np.ndarray | None = None     # (n,) SPH
    pressure: np.ndarray | None = None    # (n,) SPH

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        self.velocities = np.atleast_2d(np.asarray(self.velocities, dtype=float))
        self.mass = np.atleast_1d(np.asarray(self.mass, dtype=float))
        n = len(self.positions)
        for name in ("velocities", "mass", "affine", "density", "pressure"):
            arr = getattr(self, name)
            if arr is not None and len(arr) != n:
                raise ValueError(f"{name} has length {len(arr)}, expected {n}")

    @property
    def count(self) -> int:
        return len(self.positions)

    def copy(self) -> "ParticleSet":
        return ParticleSet(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            mass=self.mass.copy(),
            affine=None if self.affine is None else self.affine.copy(),
            density=None if self.density is None else self.density.copy(),
            pressure=None if self.pressure is None else self.pressure.copy(),
        )

    def ensure_affine(self):
        if self.affine is None:
            self.affine = np.zeros((self.count, 3, 3))

    def ensure_sph_fields(self, rest_density: float):
        if self.density is None:
            self.density = np.full(self.count, rest_density)
        if self.pressure is None:
            self.pressure = np.zeros(self.count)

    def max_speed(self) -> float:
        if self.count == 0:
            return 0.0
        return float(np.linalg.norm(self.velocities, axis=1).max())


@dataclass
class Box:
    """Axis-aligned box, min corner inclusive."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if (self.hi < self.lo).any():
            raise ValueError(f"box has negative extent: {self.lo} .. {self.hi}")

    @property
    def size(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def volume(self) -> float:
        return float(np.prod(self.size))

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= self.lo) & (points < self.hi), axis=1)

    def overlaps(self, other: "Box") -> bool:
        return bool(np.all(self.hi > other.lo) and np.all(other.hi > self.lo))

    def inside(self, other: "Box") -> bool:
        return bool(np.all(self.lo >= other.lo - 1e-12) and np.all(self.hi <= other.hi + 1e-12))
