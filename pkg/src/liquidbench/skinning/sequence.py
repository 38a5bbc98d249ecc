"""Batch reconstruction of particle frame sequences into meshes."""

from __future__ import annotations

import concurrent.futures
import re
from pathlib import Path

import numpy as np

from ..core.frames import read_particle_frame
from .mc import TriMesh, marching_cubes
from .sdf import STUDY_SCALE_FACTORS, SkinningConfig, particles_to_sdf

FRAME_PATTERN = re.compile(r"frame_(\d{5})\.lbpf$")


def scale_label(scale: float) -> str:
    text = f"{scale:g}"
    return f"{text}x"


def write_obj(path, mesh: TriMesh):
    with open(path, "w") as f:
        f.write(f"# liquidbench surface mesh: {len(mesh.vertices)} vertices, "
                f"{len(mesh.triangles)} triangles\n")
        for v in mesh.vertices:
            f.write(f"v {v[0]:.7g} {v[1]:.7g} {v[2]:.7g}\n")
        for t in mesh.triangles:
            f.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def read_obj(path) -> TriMesh:
    verts, tris = [], []
    for line in open(path):
        if line.startswith("v "):
            verts.append([float(x) for x in line.split()[1:4]])
        elif line.startswith("f "):
            tris.append([int(x.split("/")[0]) - 1 for x in line.split()[1:4]])
    return TriMesh(np.asarray(verts, dtype=float).reshape(-1, 3),
                   np.asarray(tris, dtype=np.int64).reshape(-1, 3))


def write_ply(path, mesh: TriMesh):
    """Binary little-endian PLY."""
    header = (
        "ply\nformat binary_little_endian 1.0\n"
        f"element vertex {len(mesh.vertices)}\n"
        "property float x\nproperty float y\nproperty float z\n"
        f"element face {len(mesh.triangles)}\n"
        "property list uchar int vertex_indices\nend_header\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(mesh.vertices.astype("<f4").tobytes())
        if len(mesh.triangles):
            counts = np.full((len(mesh.triangles), 1), 3, dtype=np.uint8)
            faces = mesh.triangles.astype("<i4")
            raw = b"".join(
                c.tobytes() + t.tobytes() for c, t in zip(counts, faces)
            )
            f.write(raw)


def skin_frame(
    positions: np.ndarray,
    spacing: float,
    scale: float,
    domain_lo=(0.0, 0.0, 0.0),
    domain_hi=None,
    iso: float = 0.0,
) -> TriMesh:
    cfg = SkinningConfig(particle_spacing=spacing, scale_factor=scale, iso_level=iso)
    sdf, origin = particles_to_sdf(positions, cfg, domain_lo, domain_hi)
    return marching_cubes(sdf, cfg.iso_level, cfg.cell_size, origin)


def list_frames(frame_dir) -> list[tuple[int, Path]]:
    frames = []
    for path in sorted(Path(frame_dir).iterdir()):
        m = FRAME_PATTERN.search(path.name)
        if m:
            frames.append((int(m.group(1)), path))
    return frames


def _skin_one(args):
    index, path, spacing, scale, domain_lo, domain_hi, out_dir, ply = args
    fields = read_particle_frame(path)
    if "position" not in fields:
        raise ValueError(f"{path}: frame has no position field")
    mesh = skin_frame(fields["position"].astype(float), spacing, scale,
                      domain_lo, domain_hi)
    out = Path(out_dir) / f"frame_{index:05d}_scale_{scale_label(scale)}.obj"
    write_obj(out, mesh)
    if ply:
        write_ply(out.with_suffix(".ply"), mesh)
    return out


def skin_sequence(
    frame_dir,
    out_dir,
    spacing: float,
    scales=STUDY_SCALE_FACTORS,
    domain_lo=(0.0, 0.0, 0.0),
    domain_hi=None,
    frame_indices=None,
    ply: bool = False,
    workers: int = 1,
) -> list[Path]:
    """One mesh per frame per scale factor, written as OBJ files.

    Raises FileNotFoundError naming the first missing frame when
    explicit `frame_indices` are requested. Deterministic: output
    depends only on the frame contents and the configuration.
    """
    available = dict(list_frames(frame_dir))
    if frame_indices is None:
        frame_indices = sorted(available)
    missing = [i for i in frame_indices if i not in available]
    if missing:
        raise FileNotFoundError(
            f"frame_{missing[0]:05d}.lbpf not found in {frame_dir}"
        )
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    jobs = [
        (i, available[i], spacing, scale, domain_lo, domain_hi, out_dir, ply)
        for i in frame_indices
        for scale in scales
    ]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_skin_one, jobs))
    return [_skin_one(job) for job in jobs]
