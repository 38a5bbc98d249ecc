"""Marching cubes triangulation of a scalar grid.

Vertices land on linearly interpolated zero crossings of grid edges and
are welded by global edge identity, so the mesh is watertight except
where the surface leaves the grid. Winding is consistent, outward with
respect to the negative (inside) region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mc_tables import CORNER_OFFSETS, CORNER_PAIRS, TRIANGLE_TABLE


@dataclass
class TriMesh:
    vertices: np.ndarray   # (n, 3) float
    triangles: np.ndarray  # (m, 3) int

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.validate()

    def validate(self):
        if len(self.vertices) and not np.isfinite(self.vertices).all():
            raise ValueError("mesh has non-finite vertices")
        if len(self.triangles):
            if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
                raise ValueError("triangle index out of range")

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def area(self) -> float:
        if self.is_empty:
            return 0.0
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return float(0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1).sum())

    def signed_volume(self) -> float:
        """Positive when winding is outward around an enclosed region."""
        if self.is_empty:
            return 0.0
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    def boundary_edge_count(self) -> int:
        """Edges used by exactly one triangle (0 for a watertight mesh)."""
        if self.is_empty:
            return 0
        e = np.concatenate(
            [self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]]
        )
        e.sort(axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return int((counts == 1).sum())


def marching_cubes(
    sdf: np.ndarray,
    iso: float = 0.0,
    cell_size: float = 1.0,
    origin=(0.0, 0.0, 0.0),
) -> TriMesh:
    """Extract the iso surface of a node-sampled scalar grid."""
    sdf = np.asarray(sdf, dtype=float)
    if sdf.ndim != 3 or min(sdf.shape) < 2:
        raise ValueError(f"need a 3-d grid with at least 2 nodes per axis, got {sdf.shape}")
    origin = np.asarray(origin, dtype=float)
    nx, ny, nz = sdf.shape

    inside = sdf < iso
    cube_index = np.zeros((nx - 1, ny - 1, nz - 1), dtype=np.uint16)
    for bit, (dx, dy, dz) in enumerate(CORNER_OFFSETS):
        cube_index |= inside[
            dx : nx - 1 + dx, dy : ny - 1 + dy, dz : nz - 1 + dz
        ].astype(np.uint16) << bit

    active = np.argwhere((cube_index > 0) & (cube_index < 255))
    if len(active) == 0:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    codes = cube_index[active[:, 0], active[:, 1], active[:, 2]]

    tris = TRIANGLE_TABLE[codes]                      # (a, 16)
    valid = tris >= 0
    tri_count = valid.sum(axis=1) // 3
    cell_rep = np.repeat(np.arange(len(active)), tri_count * 3)
    edge_ids = tris[valid]                            # local edge 0..11 per vertex

    # global edge key: (node i, j, k, axis) of the lower-corner endpoint
    c0 = CORNER_PAIRS[edge_ids, 0]
    c1 = CORNER_PAIRS[edge_ids, 1]
    p0 = active[cell_rep] + CORNER_OFFSETS[c0]
    p1 = active[cell_rep] + CORNER_OFFSETS[c1]
    lower = np.minimum(p0, p1)
    axis = np.argmax(np.abs(p1 - p0), axis=1)
    key = ((lower[:, 0] * ny + lower[:, 1]) * nz + lower[:, 2]) * 3 + axis

    uniq_keys, vert_index = np.unique(key, return_inverse=True)

    # interpolate one vertex per unique grid edge
    ua = uniq_keys // 3
    uaxis = uniq_keys - ua * 3
    ui = ua // (ny * nz)
    rem = ua - ui * ny * nz
    uj = rem // nz
    uk = rem - uj * nz
    lo_val = sdf[ui, uj, uk]
    step = np.zeros((len(uniq_keys), 3), dtype=np.int64)
    step[np.arange(len(uniq_keys)), uaxis] = 1
    hi_val = sdf[ui + step[:, 0], uj + step[:, 1], uk + step[:, 2]]
    denom = hi_val - lo_val
    t = np.where(np.abs(denom) > 1e-300, (iso - lo_val) / np.where(denom == 0, 1, denom), 0.5)
    t = np.clip(t, 0.0, 1.0)
    verts = (np.stack([ui, uj, uk], axis=-1) + step * t[:, None]) * cell_size + origin

    triangles = vert_index.reshape(-1, 3)
    # table order yields inward-facing triangles for the inside = "< iso"
    # convention used here; swap to make windings outward
    triangles = triangles[:, [0, 2, 1]]
    return TriMesh(verts, triangles)
