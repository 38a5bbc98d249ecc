"""Static boundary particles lining the solid surfaces.

Walls are sampled as dummy particles that continue the fluid lattice
outward: same spacing, same mass (rho0 h^3), two layers deep so no
fluid kernel reaches past them. A fluid particle near a flat wall then
sees exactly the neighborhood an interior particle sees, so there is
no density deficit (or excess) at walls and corners. Each slab is
extended so corner blocks are tiled exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.particles import Box


@dataclass
class BoundaryParticleSet:
    positions: np.ndarray
    pseudo_mass: np.ndarray
    pressure: np.ndarray = None
    velocity: np.ndarray = None

    def __post_init__(self):
        n = len(self.positions)
        if self.pressure is None:
            self.pressure = np.zeros(n)
        if self.velocity is None:
            self.velocity = np.zeros((n, 3))

    @property
    def count(self) -> int:
        return len(self.positions)


def _global_lattice(box_lo, box_hi, spacing):
    """Lattice points (m + 0.5) * spacing falling inside [lo, hi)."""
    axes = []
    for d in range(3):
        m0 = int(np.ceil(box_lo[d] / spacing - 0.5 - 1e-9))
        m1 = int(np.floor(box_hi[d] / spacing - 0.5 + 1e-9))
        axes.append((np.arange(m0, m1 + 1) + 0.5) * spacing)
    if any(len(a) == 0 for a in axes):
        return np.zeros((0, 3))
    xx, yy, zz = np.meshgrid(*axes, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=-1)


def _wall_slabs(domain: Box, spacing: float, layers: int):
    """Floor and four side walls (open top), tiling corners exactly once.

    The floor slab widens by the wall depth in x and z, the x walls
    widen in z only, the z walls not at all.
    """
    d = layers * spacing
    lo, hi = domain.lo, domain.hi
    slabs = [
        # floor
        ((lo[0] - d, lo[1] - d, lo[2] - d), (hi[0] + d, lo[1], hi[2] + d)),
        # x walls
        ((lo[0] - d, lo[1], lo[2] - d), (lo[0], hi[1], hi[2] + d)),
        ((hi[0], lo[1], lo[2] - d), (hi[0] + d, hi[1], hi[2] + d)),
        # z walls
        ((lo[0], lo[1], lo[2] - d), (hi[0], hi[1], lo[2])),
        ((lo[0], lo[1], hi[2]), (hi[0], hi[1], hi[2] + d)),
    ]
    return np.concatenate(
        [_global_lattice(np.asarray(a), np.asarray(b), spacing) for a, b in slabs],
        axis=0,
    )


def _box_shell(box: Box, spacing: float, layers: int):
    """Lattice filling a shallow shell just inside an obstacle box."""
    pts = _global_lattice(box.lo, box.hi, spacing)
    if not len(pts):
        return pts
    depth = layers * spacing
    near_face = np.zeros(len(pts), dtype=bool)
    for d in range(3):
        near_face |= (pts[:, d] - box.lo[d] < depth) | (box.hi[d] - pts[:, d] < depth)
    return pts[near_face]


def build_boundary(
    domain: Box,
    spacing: float,
    rest_density: float,
    support_radius: float,
    kernel=None,
    obstacle: Box | None = None,
) -> BoundaryParticleSet:
    """Dummy wall particles with fluid-lattice volume mass rho0 h^3."""
    layers = max(2, int(np.ceil(support_radius / spacing)) - 0)
    pts = _wall_slabs(domain, spacing, layers)
    if obstacle is not None:
        shell = _box_shell(obstacle, spacing, layers)
        if len(shell):
            pts = np.concatenate([pts, shell], axis=0)
    mass = np.full(len(pts), rest_density * spacing**3)
    return BoundaryParticleSet(positions=pts, pseudo_mass=mass)
