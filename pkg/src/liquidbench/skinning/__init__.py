from .mc import TriMesh, marching_cubes
from .sdf import (
    STUDY_SCALE_FACTORS,
    SkinningConfig,
    particles_to_sdf,
)
from .sequence import (
    list_frames,
    read_obj,
    scale_label,
    skin_frame,
    skin_sequence,
    write_obj,
    write_ply,
)

__all__ = [
    "STUDY_SCALE_FACTORS",
    "SkinningConfig",
    "TriMesh",
    "list_frames",
    "marching_cubes",
    "particles_to_sdf",
    "read_obj",
    "scale_label",
    "skin_frame",
    "skin_sequence",
    "write_obj",
    "write_ply",
]
