import numpy as np
import pytest

from liquidbench.core import write_particle_frame
from liquidbench.skinning import (
    STUDY_SCALE_FACTORS,
    SkinningConfig,
    TriMesh,
    list_frames,
    marching_cubes,
    particles_to_sdf,
    read_obj,
    scale_label,
    skin_frame,
    skin_sequence,
    write_obj,
    write_ply,
)


def block_particles(spacing=0.02, n=(10, 6, 8), origin=(0.1, 0.1, 0.1)):
    ii, jj, kk = np.meshgrid(*(np.arange(x) for x in n), indexing="ij")
    pts = np.stack([ii, jj, kk], axis=-1).reshape(-1, 3) * spacing
    return pts + np.asarray(origin)


class TestDiameterRule:
    def test_rule_switches_at_scale_two(self):
        h = 0.01
        for scale in (0.5, 0.75, 1.0, 1.5):
            cfg = SkinningConfig(particle_spacing=h, scale_factor=scale)
            assert cfg.particle_diameter == pytest.approx(2 * h / scale)
            assert cfg.particle_diameter > h
        for scale in (2.0, 3.0, 4.0):
            cfg = SkinningConfig(particle_spacing=h, scale_factor=scale)
            assert cfg.particle_diameter == pytest.approx(h)

    def test_base_resolution_cell_is_twice_spacing(self):
        cfg = SkinningConfig(particle_spacing=0.01, scale_factor=1.0)
        assert cfg.cell_size == pytest.approx(0.02)

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            SkinningConfig(particle_spacing=0.0)
        with pytest.raises(ValueError):
            SkinningConfig(particle_spacing=0.01, scale_factor=-1)


class TestSdf:
    def test_single_particle_is_a_sphere(self):
        h = 0.02
        cfg = SkinningConfig(particle_spacing=h, scale_factor=2.0)
        pts = np.array([[0.15, 0.15, 0.15]])
        sdf, origin = particles_to_sdf(pts, cfg, (0, 0, 0), (0.3, 0.3, 0.3))
        dims = sdf.shape
        ii, jj, kk = np.meshgrid(*(np.arange(d) for d in dims), indexing="ij")
        nodes = origin + np.stack([ii, jj, kk], axis=-1) * cfg.cell_size
        dist = np.linalg.norm(nodes - pts[0], axis=-1)
        covered = dist < cfg.blend_radius
        expected = dist - cfg.particle_radius
        assert np.abs((sdf - expected)[covered]).max() < cfg.cell_size
        assert (sdf[~covered] > 0).all()

    def test_empty_particles_all_positive_and_empty_mesh(self):
        cfg = SkinningConfig(particle_spacing=0.02)
        sdf, origin = particles_to_sdf(np.zeros((0, 3)), cfg, (0, 0, 0), (0.2, 0.2, 0.2))
        assert (sdf > 0).all()
        mesh = marching_cubes(sdf, cfg.iso_level, cfg.cell_size, origin)
        assert mesh.is_empty

    @pytest.mark.parametrize("scale", STUDY_SCALE_FACTORS)
    def test_dense_block_interior_negative_no_holes(self, scale):
        h = 0.02
        cfg = SkinningConfig(particle_spacing=h, scale_factor=scale)
        pts = block_particles(spacing=h)
        sdf, origin = particles_to_sdf(pts, cfg, (0, 0, 0), (0.5, 0.4, 0.4))
        lo = pts.min(axis=0) + 2 * h
        hi = pts.max(axis=0) - 2 * h
        dims = sdf.shape
        ii, jj, kk = np.meshgrid(*(np.arange(d) for d in dims), indexing="ij")
        nodes = origin + np.stack([ii, jj, kk], axis=-1) * cfg.cell_size
        interior = np.all((nodes >= lo) & (nodes <= hi), axis=-1)
        assert interior.any()
        assert (sdf[interior] < 0).all(), f"holes at scale {scale}"


class TestMarchingCubes:
    def sphere_sdf(self, n=64, radius=1.0, half=1.6):
        xs = np.linspace(-half, half, n)
        cell = xs[1] - xs[0]
        x, y, z = np.meshgrid(xs, xs, xs, indexing="ij")
        return np.sqrt(x**2 + y**2 + z**2) - radius, cell

    def test_sphere_area_within_three_percent(self):
        sdf, cell = self.sphere_sdf()
        mesh = marching_cubes(sdf, 0.0, cell, origin=(-1.6, -1.6, -1.6))
        assert mesh.area() == pytest.approx(4 * np.pi, rel=0.03)

    def test_sphere_mesh_watertight_with_outward_winding(self):
        sdf, cell = self.sphere_sdf(n=32)
        mesh = marching_cubes(sdf, 0.0, cell, origin=(-1.6, -1.6, -1.6))
        assert mesh.boundary_edge_count() == 0
        assert mesh.signed_volume() > 0

    def test_all_positive_gives_empty_mesh(self):
        mesh = marching_cubes(np.ones((8, 8, 8)), 0.0, 0.1)
        assert mesh.is_empty

    def test_sign_flip_gives_same_surface_inverted_winding(self):
        sdf, cell = self.sphere_sdf(n=32)
        mesh = marching_cubes(sdf, 0.0, cell)
        flipped = marching_cubes(-sdf, 0.0, cell)
        assert flipped.area() == pytest.approx(mesh.area(), rel=1e-12)
        assert flipped.signed_volume() == pytest.approx(-mesh.signed_volume(), rel=1e-12)

    def test_vertices_on_zero_crossings(self):
        sdf, cell = self.sphere_sdf(n=48)
        mesh = marching_cubes(sdf, 0.0, cell, origin=(-1.6, -1.6, -1.6))
        r = np.linalg.norm(mesh.vertices, axis=1)
        assert np.abs(r - 1.0).max() < cell  # linear interpolation accuracy

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            marching_cubes(np.zeros((4, 4)), 0.0, 0.1)


class TestTranslationEquivariance:
    def test_shift_by_whole_cells_shifts_mesh_identically(self):
        h = 0.02
        cfg = SkinningConfig(particle_spacing=h, scale_factor=1.0)
        # keep the surface off the exact node lattice, where the sign of
        # a +-1e-16 value would arbitrarily flip mesh topology
        pts = block_particles(spacing=h, n=(6, 5, 4), origin=(0.083, 0.081, 0.087))
        shift = np.array([cfg.cell_size, 0.0, 0.0])
        mesh_a = skin_frame(pts, h, 1.0, (0, 0, 0), (0.5, 0.4, 0.4))
        mesh_b = skin_frame(pts + shift, h, 1.0, (0, 0, 0), (0.5, 0.4, 0.4))
        assert len(mesh_a.vertices) == len(mesh_b.vertices)
        set_a = {tuple(np.round(v, 8)) for v in mesh_a.vertices}
        set_b = {tuple(np.round(v - shift, 8)) for v in mesh_b.vertices}
        assert set_a == set_b
        assert mesh_b.area() == pytest.approx(mesh_a.area(), rel=1e-9)


class TestSequences:
    def _write_frames(self, tmp_path, count=3):
        rng = np.random.default_rng(0)
        for idx in range(count):
            pts = block_particles(spacing=0.02, n=(6, 4, 4))
            pts = pts + rng.normal(scale=0.002, size=pts.shape)
            write_particle_frame(
                tmp_path / f"frame_{idx:05d}.lbpf",
                {"position": pts.astype(np.float32)},
            )
        return tmp_path

    def test_three_frames_seven_scales_gives_21_meshes(self, tmp_path):
        frames = self._write_frames(tmp_path)
        out = tmp_path / "meshes"
        written = skin_sequence(frames, out, spacing=0.02,
                                domain_hi=(0.5, 0.4, 0.4))
        assert len(written) == 21
        assert all(p.exists() for p in written)

    def test_missing_frame_error_names_frame(self, tmp_path):
        frames = self._write_frames(tmp_path, count=2)
        with pytest.raises(FileNotFoundError, match="frame_00005"):
            skin_sequence(frames, tmp_path / "m", spacing=0.02,
                          frame_indices=[0, 5], domain_hi=(0.5, 0.4, 0.4))

    def test_vertex_count_grows_with_scale_on_splashy_frame(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(0.1, 0.3, size=(600, 3))  # scattered droplets
        counts = []
        for scale in STUDY_SCALE_FACTORS:
            mesh = skin_frame(pts, 0.02, scale, (0, 0, 0), (0.4, 0.4, 0.4))
            counts.append(len(mesh.vertices))
        assert all(b >= a for a, b in zip(counts, counts[1:])), counts
        assert counts[-1] > counts[0]

    def test_deterministic(self, tmp_path):
        frames = self._write_frames(tmp_path, count=1)
        a = skin_sequence(frames, tmp_path / "a", spacing=0.02, scales=(2.0,),
                          domain_hi=(0.5, 0.4, 0.4))
        b = skin_sequence(frames, tmp_path / "b", spacing=0.02, scales=(2.0,),
                          domain_hi=(0.5, 0.4, 0.4))
        assert a[0].read_text() == b[0].read_text()

    def test_scale_labels(self):
        assert scale_label(0.5) == "0.5x"
        assert scale_label(2.0) == "2x"
        assert scale_label(0.75) == "0.75x"


class TestMeshIO:
    def test_obj_roundtrip(self, tmp_path):
        sdf = np.linalg.norm(
            np.stack(np.meshgrid(*([np.linspace(-1, 1, 16)] * 3), indexing="ij"), -1),
            axis=-1,
        ) - 0.6
        mesh = marching_cubes(sdf, 0.0, 2.0 / 15, origin=(-1, -1, -1))
        path = tmp_path / "m.obj"
        write_obj(path, mesh)
        back = read_obj(path)
        assert len(back.vertices) == len(mesh.vertices)
        assert np.array_equal(back.triangles, mesh.triangles)
        np.testing.assert_allclose(back.vertices, mesh.vertices, atol=1e-6)

    def test_ply_binary_header(self, tmp_path):
        mesh = TriMesh(
            np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]), np.array([[0, 1, 2]])
        )
        path = tmp_path / "m.ply"
        write_ply(path, mesh)
        head = path.read_bytes()[:200]
        assert head.startswith(b"ply\nformat binary_little_endian 1.0\n")
        assert b"element vertex 3" in head
        assert b"element face 1" in head

    def test_mesh_validation(self):
        with pytest.raises(ValueError):
            TriMesh(np.array([[0.0, 0, 0]]), np.array([[0, 1, 2]]))
        with pytest.raises(ValueError):
            TriMesh(np.array([[np.nan, 0, 0]]), np.zeros((0, 3), dtype=int))

    def test_list_frames_orders_by_index(self, tmp_path):
        for idx in (3, 0, 11):
            write_particle_frame(
                tmp_path / f"frame_{idx:05d}.lbpf", {"position": np.zeros((1, 3))}
            )
        found = list_frames(tmp_path)
        assert [i for i, _ in found] == [0, 3, 11]
