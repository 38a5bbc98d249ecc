"""On-disk formats for per-frame outputs.

Particle frames: little-endian binary with a small header (magic,
version, particle count, field table), then one f32 block per field.
Vector fields store xyz triples. A CSV export exists for spot checks.

Level-set dumps: one ASCII header line, then the raw f32 grid in C
order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

PARTICLE_MAGIC = b"LBPF"
PARTICLE_VERSION = 1
LEVELSET_MAGIC = "LBLS"


def write_particle_frame(path, fields: dict[str, np.ndarray]):
    """`fields` maps name -> (n,) or (n, 3) array; all lengths equal."""
    names = list(fields)
    if not names:
        raise ValueError("no fields to write")
    n = len(fields[names[0]])
    parts = [PARTICLE_MAGIC, struct.pack("<IQI", PARTICLE_VERSION, n, len(names))]
    blocks = []
    for name in names:
        arr = np.asarray(fields[name], dtype=np.float32)
        if len(arr) != n:
            raise ValueError(f"field {name!r} length {len(arr)} != {n}")
        width = 1 if arr.ndim == 1 else arr.shape[1]
        if width not in (1, 3):
            raise ValueError(f"field {name!r} must be scalar or 3-vector")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<HB", len(encoded), width))
        parts.append(encoded)
        blocks.append(arr.astype("<f4").tobytes(order="C"))
    Path(path).write_bytes(b"".join(parts + blocks))


def read_particle_frame(path) -> dict[str, np.ndarray]:
    data = Path(path).read_bytes()
    if data[:4] != PARTICLE_MAGIC:
        raise ValueError(f"{path}: not a particle frame file")
    version, n, n_fields = struct.unpack_from("<IQI", data, 4)
    if version != PARTICLE_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    off = 4 + 16
    meta = []
    for _ in range(n_fields):
        name_len, width = struct.unpack_from("<HB", data, off)
        off += 3
        name = data[off : off + name_len].decode("utf-8")
        off += name_len
        meta.append((name, width))
    out = {}
    for name, width in meta:
        count = n * width
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=off)
        off += 4 * count
        out[name] = arr.reshape(n, width) if width > 1 else arr.copy()
    return out


def write_particles_csv(path, fields: dict[str, np.ndarray]):
    names = list(fields)
    n = len(fields[names[0]])
    cols, headers = [], []
    for name in names:
        arr = np.asarray(fields[name])
        if arr.ndim == 1:
            headers.append(name)
            cols.append(arr)
        else:
            for axis, suffix in zip(range(arr.shape[1]), "xyz"):
                headers.append(f"{name}_{suffix}")
                cols.append(arr[:, axis])
    with open(path, "w") as f:
        f.write(",".join(headers) + "\n")
        for row in np.stack(cols, axis=-1):
            f.write(",".join(f"{v:.7g}" for v in row) + "\n")


def write_levelset(path, phi: np.ndarray, cell_size: float, origin=(0.0, 0.0, 0.0)):
    nx, ny, nz = phi.shape
    header = (
        f"{LEVELSET_MAGIC} {nx} {ny} {nz} {cell_size!r} "
        f"{origin[0]!r} {origin[1]!r} {origin[2]!r}\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(np.asarray(phi, dtype="<f4").tobytes(order="C"))


def read_levelset(path):
    with open(path, "rb") as f:
        header = f.readline().decode("ascii").split()
        if header[0] != LEVELSET_MAGIC:
            raise ValueError(f"{path}: not a level-set dump")
        nx, ny, nz = (int(x) for x in header[1:4])
        cell = float(header[4])
        origin = tuple(float(x) for x in header[5:8])
        phi = np.frombuffer(f.read(), dtype="<f4").reshape(nx, ny, nz)
    return phi.astype(float), cell, origin
