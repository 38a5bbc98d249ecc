"""Staggered (MAC) grid state for the Eulerian solvers.

Velocity components live on cell faces (u on x-faces, v on y-faces,
w on z-faces), pressure and flags at cell centers. The outermost grid
boundary is treated as a closed solid wall by every operation; interior
SOLID cells mark the obstacle. All lengths are meters, velocities m/s.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class CellFlag(enum.IntEnum):
    FLUID = 0
    AIR = 1
    SOLID = 2


class NumericalFailure(RuntimeError):
    """Raised when a solver state goes non-finite; carries the frame index."""

    def __init__(self, message, frame=None):
        self.frame = frame
        super().__init__(message if frame is None else f"{message} (frame {frame})")


# grid-coordinate offsets of each staggered component
COMPONENT_OFFSETS = {
    "u": (0.0, 0.5, 0.5),
    "v": (0.5, 0.0, 0.5),
    "w": (0.5, 0.5, 0.0),
    "center": (0.5, 0.5, 0.5),
}


@dataclass
class MacGrid:
    dims: tuple[int, int, int]
    cell_size: float
    u: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)
    w: np.ndarray = field(default=None)
    pressure: np.ndarray = field(default=None)
    cell_flags: np.ndarray = field(default=None)

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 1:
            raise ValueError(f"bad dims {self.dims}")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        if self.u is None:
            self.u = np.zeros((nx + 1, ny, nz))
        if self.v is None:
            self.v = np.zeros((nx, ny + 1, nz))
        if self.w is None:
            self.w = np.zeros((nx, ny, nz + 1))
        if self.pressure is None:
            self.pressure = np.zeros((nx, ny, nz))
        if self.cell_flags is None:
            self.cell_flags = np.full((nx, ny, nz), CellFlag.AIR, dtype=np.int8)
        self.validate_shapes()

    def validate_shapes(self):
        nx, ny, nz = self.dims
        expect = {
            "u": (nx + 1, ny, nz),
            "v": (nx, ny + 1, nz),
            "w": (nx, ny, nz + 1),
            "pressure": (nx, ny, nz),
            "cell_flags": (nx, ny, nz),
        }
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.dims, dtype=float) * self.cell_size

    def copy(self) -> "MacGrid":
        return MacGrid(
            dims=self.dims,
            cell_size=self.cell_size,
            u=self.u.copy(),
            v=self.v.copy(),
            w=self.w.copy(),
            pressure=self.pressure.copy(),
            cell_flags=self.cell_flags.copy(),
        )

    def max_speed(self) -> float:
        components = np.array(
            [
                np.abs(self.u).max(initial=0.0),
                np.abs(self.v).max(initial=0.0),
                np.abs(self.w).max(initial=0.0),
            ]
        )
        m = float(components.max())  # np.max propagates NaN
        if not np.isfinite(m):
            raise NumericalFailure("non-finite grid velocity")
        return m

    def solid_mask(self) -> np.ndarray:
        return self.cell_flags == CellFlag.SOLID

    def fluid_mask(self) -> np.ndarray:
        return self.cell_flags == CellFlag.FLUID

    def cell_centers(self) -> np.ndarray:
        nx, ny, nz = self.dims
        ii, jj, kk = np.meshgrid(
            np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"
        )
        return (np.stack([ii, jj, kk], axis=-1) + 0.5) * self.cell_size

    def sample(self, points: np.ndarray) -> np.ndarray:
        """Trilinear velocity at arbitrary points, shape (n, 3)."""
        return np.stack(
            [
                sample_component(self.u, points, "u", self.cell_size),
                sample_component(self.v, points, "v", self.cell_size),
                sample_component(self.w, points, "w", self.cell_size),
            ],
            axis=-1,
        )

    def enforce_wall_faces(self):
        """Zero normal velocity on domain-boundary and obstacle faces."""
        self.u[0, :, :] = 0.0
        self.u[-1, :, :] = 0.0
        self.v[:, 0, :] = 0.0
        self.v[:, -1, :] = 0.0
        self.w[:, :, 0] = 0.0
        self.w[:, :, -1] = 0.0
        solid = self.solid_mask()
        if solid.any():
            self.u[:-1, :, :][solid] = 0.0
            self.u[1:, :, :][solid] = 0.0
            self.v[:, :-1, :][solid] = 0.0
            self.v[:, 1:, :][solid] = 0.0
            self.w[:, :, :-1][solid] = 0.0
            self.w[:, :, 1:][solid] = 0.0


def interpolation_weights(points, offset, cell_size, shape):
    """Base corner indices and trilinear fractions for gathering/scattering.

    Returns (base (n,3) int, frac (n,3) float) with base clamped so that
    base+1 stays in range.
    """
    g = points / cell_size - np.asarray(offset)
    g = np.clip(g, 0.0, np.asarray(shape, dtype=float) - 1.0 - 1e-9)
    base = np.floor(g).astype(np.int64)
    base = np.minimum(base, np.asarray(shape) - 2)
    base = np.maximum(base, 0)
    frac = g - base
    return base, np.clip(frac, 0.0, 1.0)


def sample_component(arr, points, component, cell_size):
    """Trilinear sample of one staggered array at world-space points."""
    offset = COMPONENT_OFFSETS[component]
    base, f = interpolation_weights(points, offset, cell_size, arr.shape)
    i, j, k = base[:, 0], base[:, 1], base[:, 2]
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
    out = np.zeros(len(points))
    for di in (0, 1):
        wx = fx if di else 1.0 - fx
        for dj in (0, 1):
            wy = fy if dj else 1.0 - fy
            for dk in (0, 1):
                wz = fz if dk else 1.0 - fz
                out += wx * wy * wz * arr[i + di, j + dj, k + dk]
    return out


def scatter_component(points, values, component, cell_size, shape, affine=None, offsets_out=None):
    """Mass-weighted scatter of particle values onto one staggered array.

    Returns (value_sum, weight_sum). With `affine` (n, 3) the scattered
    value per corner is value + affine . (corner - point), the affine
    particle-in-cell contribution for this component.
    """
    offset = COMPONENT_OFFSETS[component]
    base, f = interpolation_weights(points, offset, cell_size, shape)
    i, j, k = base[:, 0], base[:, 1], base[:, 2]
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
    size = int(np.prod(shape))
    vals = np.zeros(size)
    wts = np.zeros(size)
    ny, nz = shape[1], shape[2]
    for di in (0, 1):
        wx = fx if di else 1.0 - fx
        for dj in (0, 1):
            wy = fy if dj else 1.0 - fy
            for dk in (0, 1):
                wz = fz if dk else 1.0 - fz
                wgt = wx * wy * wz
                flat = ((i + di) * ny + (j + dj)) * nz + (k + dk)
                if affine is None:
                    contrib = values
                else:
                    corner = (base + np.array([di, dj, dk]) + np.asarray(offset)) * cell_size
                    contrib = values + np.einsum("nd,nd->n", affine, corner - points)
                vals += np.bincount(flat, weights=wgt * contrib, minlength=size)
                wts += np.bincount(flat, weights=wgt, minlength=size)
    return vals.reshape(shape), wts.reshape(shape)
