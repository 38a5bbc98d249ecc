"""Uniform-grid fixed-radius neighbor search.

The grid cell size equals the query radius, so neighbors of a point can
only sit in the 3x3x3 block of cells around it. Particles are bucketed
by sorting on a linearized cell key, which keeps both single-point
queries and bulk pair generation fully vectorized.
"""

from __future__ import annotations

import numpy as np

# half-space cell offsets: (0,0,0) plus 13 lexicographically-positive
# directions; enough to enumerate every unordered cell pair once
_HALF_OFFSETS = np.array(
    [
        (0, 0, 0),
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1),
        (0, 1, 1), (0, 1, -1),
        (1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1),
    ],
    dtype=np.int64,
)

_ALL_OFFSETS = np.array(
    [(di, dj, dk) for di in (-1, 0, 1) for dj in (-1, 0, 1) for dk in (-1, 0, 1)],
    dtype=np.int64,
)


class NeighborGrid:
    """Spatial hash over a particle snapshot; rebuild after positions move."""

    def __init__(self, positions: np.ndarray, radius: float):
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.positions = np.atleast_2d(np.asarray(positions, dtype=float))
        n = len(self.positions)
        if n == 0:
            self._order = np.zeros(0, dtype=np.int64)
            self._cell_of = np.zeros((0, 3), dtype=np.int64)
            self._keys = np.zeros(0, dtype=np.int64)
            self._starts = np.zeros(1, dtype=np.int64)
            self._mins = np.zeros(3, dtype=np.int64)
            self._span = np.ones(3, dtype=np.int64)
            return
        cells = np.floor(self.positions / self.radius).astype(np.int64)
        self._mins = cells.min(axis=0) - 1
        cells -= self._mins
        self._span = cells.max(axis=0) + 2
        self._cell_of = cells
        flat = self._flatten(cells)
        self._order = np.argsort(flat, kind="stable")
        sorted_flat = flat[self._order]
        uniq, starts = np.unique(sorted_flat, return_index=True)
        self._keys = uniq
        self._starts = np.append(starts, n)

    def _flatten(self, cells):
        return (cells[:, 0] * self._span[1] + cells[:, 1]) * self._span[2] + cells[:, 2]

    def _bucket(self, key):
        pos = np.searchsorted(self._keys, key)
        if pos >= len(self._keys) or self._keys[pos] != key:
            return None
        return self._order[self._starts[pos] : self._starts[pos + 1]]

    def query(self, point, radius: float) -> np.ndarray:
        """Indices of all particles within `radius` of `point` (inclusive).

        The radius must equal the build radius; querying at any other
        radius would silently miss neighbors.
        """
        if not np.isclose(radius, self.radius):
            raise ValueError(
                f"query radius {radius} differs from build radius {self.radius}"
            )
        point = np.asarray(point, dtype=float)
        if len(self.positions) == 0:
            return np.zeros(0, dtype=np.int64)
        cell = np.floor(point / self.radius).astype(np.int64) - self._mins
        found = []
        for off in _ALL_OFFSETS:
            c = cell + off
            if (c < 0).any() or (c >= self._span).any():
                continue
            bucket = self._bucket((c[0] * self._span[1] + c[1]) * self._span[2] + c[2])
            if bucket is not None:
                found.append(bucket)
        if not found:
            return np.zeros(0, dtype=np.int64)
        cand = np.concatenate(found)
        d2 = ((self.positions[cand] - point) ** 2).sum(axis=1)
        return np.sort(cand[d2 <= self.radius**2])

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """All unordered particle pairs (i, j), i != j, within the radius."""
        return self.pairs_with(None)

    def pairs_with(self, other: "NeighborGrid | None"):
        """Pairs between this set and `other` (or within this set if None).

        Returns (i, j): i indexes self, j indexes other/self. For the
        self case each unordered pair appears once. Both grids must
        share the build radius.
        """
        if len(self.positions) == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        self_pairs = other is None
        if self_pairs:
            other = self
        elif not np.isclose(other.radius, self.radius):
            raise ValueError("grids built with different radii")
        offsets = _HALF_OFFSETS if self_pairs else _ALL_OFFSETS
        out_i, out_j = [], []
        mins_delta = self._mins - other._mins
        for off in offsets:
            a_idx, b_idx = self._matched_ranges(other, off + mins_delta)
            if a_idx is None:
                continue
            ii, jj = _cross_pairs(a_idx, b_idx)
            if self_pairs and (off == 0).all():
                keep = ii < jj
                ii, jj = ii[keep], jj[keep]
            if len(ii):
                out_i.append(ii)
                out_j.append(jj)
        if not out_i:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        i = np.concatenate(out_i)
        j = np.concatenate(out_j)
        d2 = ((self.positions[i] - other.positions[j]) ** 2).sum(axis=1)
        keep = d2 <= self.radius**2
        return i[keep], j[keep]

    def _matched_ranges(self, other, offset):
        # cells of self matched against cells of other shifted by offset
        shifted = self._keys  # keys of occupied self cells
        # reconstruct 3d cells from keys
        k = shifted
        ci = k // (self._span[1] * self._span[2])
        rem = k - ci * self._span[1] * self._span[2]
        cj = rem // self._span[2]
        ck = rem - cj * self._span[2]
        target = np.stack([ci, cj, ck], axis=1) + offset
        valid = ((target >= 0) & (target < other._span)).all(axis=1)
        if not valid.any():
            return None, None
        tkey = (
            target[valid, 0] * other._span[1] + target[valid, 1]
        ) * other._span[2] + target[valid, 2]
        pos = np.searchsorted(other._keys, tkey)
        pos = np.minimum(pos, len(other._keys) - 1)
        hit = other._keys[pos] == tkey
        if not hit.any():
            return None, None
        self_cells = np.flatnonzero(valid)[hit]
        other_cells = pos[hit]
        # expand each matched (cell_a, cell_b) into index ranges
        a_start = self._starts[self_cells]
        a_len = self._starts[self_cells + 1] - a_start
        b_start = other._starts[other_cells]
        b_len = other._starts[other_cells + 1] - b_start
        return (self._order, a_start, a_len), (other._order, b_start, b_len)


def _cross_pairs(a, b):
    """Cross product of per-cell index ranges, fully vectorized."""
    a_order, a_start, a_len = a
    b_order, b_start, b_len = b
    counts = a_len * b_len
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    cell_id = np.repeat(np.arange(len(counts)), counts)
    local = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    ai = local // np.repeat(b_len, counts)
    bi = local - ai * np.repeat(b_len, counts)
    return (
        a_order[np.repeat(a_start, counts) + ai],
        b_order[np.repeat(b_start, counts) + bi],
    )


def brute_force_query(positions, point, radius):
    """Reference O(n^2) neighbor search used as the test oracle."""
    positions = np.atleast_2d(positions)
    d2 = ((positions - np.asarray(point)) ** 2).sum(axis=1)
    return np.sort(np.flatnonzero(d2 <= radius**2))
