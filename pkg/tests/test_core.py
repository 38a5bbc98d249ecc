import math

import numpy as np
import pytest

from liquidbench.core import (
    Box,
    CellFlag,
    MacGrid,
    NeighborGrid,
    NumericalFailure,
    ParticleSet,
    ScenarioConfig,
    SphKernel,
    TankMotion,
    brute_force_query,
    build_scenario,
    cfl_timestep,
    dam_config,
    read_levelset,
    read_particle_frame,
    sample_component,
    scale_dims,
    wave_config,
    wave_tank_motion,
    write_levelset,
    write_particle_frame,
)


class TestKernel:
    def test_compact_support(self):
        k = SphKernel(0.1)
        assert k.w(0.1) == 0.0
        assert k.w(0.15) == 0.0
        assert k.w(0.0999) > 0.0
        assert (k.w(np.linspace(0, 0.2, 50)) >= 0.0).all()

    def test_unit_integral(self):
        # radial quadrature of 4 pi r^2 W(r) over the support
        k = SphKernel(0.37)
        r = np.linspace(0, 0.37, 20001)
        integrand = 4.0 * np.pi * r**2 * k.w(r)
        total = np.trapezoid(integrand, r)
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_gradient_matches_finite_difference(self):
        k = SphKernel(0.2)
        for r in (0.03, 0.11, 0.17):
            num = (k.w(r + 1e-7) - k.w(r - 1e-7)) / 2e-7
            assert k.dw_dr(r) == pytest.approx(num, rel=1e-4)

    def test_grad_w_points_downhill_and_vanishes_at_origin(self):
        k = SphKernel(0.2)
        g = k.grad_w(np.array([[0.05, 0.0, 0.0]]))
        assert g[0, 0] < 0.0  # W decreases away from the origin
        g0 = k.grad_w(np.array([[0.0, 0.0, 0.0]]))
        assert np.allclose(g0, 0.0)

    def test_lattice_normalization(self):
        # sum_j V_j W_ij over a uniform lattice should be 1 within 2 percent
        h = 0.02
        k = SphKernel(2 * h)
        coords = np.arange(-4, 5) * h
        xx, yy, zz = np.meshgrid(coords, coords, coords, indexing="ij")
        pts = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=-1)
        r = np.linalg.norm(pts, axis=1)
        total = (h**3 * k.w(r)).sum()
        assert total == pytest.approx(1.0, abs=0.02)


class TestNeighborSearch:
    def test_single_particle_self_query(self):
        grid = NeighborGrid(np.array([[0.5, 0.5, 0.5]]), 0.1)
        assert list(grid.query([0.5, 0.5, 0.5], 0.1)) == [0]

    def test_support_boundary_excluded(self):
        h = 0.1
        pos = np.array([[0.0, 0.0, 0.0], [1.01 * h, 0.0, 0.0]])
        grid = NeighborGrid(pos, h)
        assert list(grid.query(pos[0], h)) == [0]
        assert list(grid.query(pos[1], h)) == [1]

    def test_exact_boundary_included(self):
        h = 0.25
        pos = np.array([[0.0, 0.0, 0.0], [h, 0.0, 0.0]])
        grid = NeighborGrid(pos, h)
        assert list(grid.query(pos[0], h)) == [0, 1]

    def test_wrong_radius_rejected(self):
        grid = NeighborGrid(np.zeros((1, 3)), 0.1)
        with pytest.raises(ValueError):
            grid.query([0.0, 0.0, 0.0], 0.2)

    def test_matches_brute_force_on_100_seeds(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = rng.integers(2, 60)
            pos = rng.uniform(-1, 1, size=(n, 3))
            radius = float(rng.uniform(0.05, 0.8))
            grid = NeighborGrid(pos, radius)
            probe = pos[rng.integers(0, n)] + rng.normal(scale=0.1, size=3)
            assert np.array_equal(
                grid.query(probe, radius), brute_force_query(pos, probe, radius)
            ), f"seed {seed}"

    def test_thousand_particles_match_brute_force(self):
        rng = np.random.default_rng(123)
        pos = rng.uniform(0, 1, size=(1000, 3))
        radius = 0.11
        grid = NeighborGrid(pos, radius)
        for idx in rng.integers(0, 1000, size=25):
            assert np.array_equal(
                grid.query(pos[idx], radius), brute_force_query(pos, pos[idx], radius)
            )

    def test_pairs_match_brute_force(self):
        for seed in range(30):
            rng = np.random.default_rng(1000 + seed)
            n = rng.integers(2, 80)
            pos = rng.uniform(-0.5, 0.5, size=(n, 3))
            radius = float(rng.uniform(0.08, 0.5))
            i, j = NeighborGrid(pos, radius).pairs()
            got = {(min(a, b), max(a, b)) for a, b in zip(i.tolist(), j.tolist())}
            d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1)
            want = {
                (a, b)
                for a in range(n)
                for b in range(a + 1, n)
                if d2[a, b] <= radius**2
            }
            assert got == want, f"seed {seed}"

    def test_cross_pairs_match_brute_force(self):
        rng = np.random.default_rng(77)
        a = rng.uniform(0, 1, size=(50, 3))
        b = rng.uniform(0, 1, size=(70, 3))
        radius = 0.2
        ga, gb = NeighborGrid(a, radius), NeighborGrid(b, radius)
        i, j = ga.pairs_with(gb)
        got = set(zip(i.tolist(), j.tolist()))
        d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)
        want = {(x, y) for x in range(50) for y in range(70) if d2[x, y] <= radius**2}
        assert got == want

    def test_empty_set(self):
        grid = NeighborGrid(np.zeros((0, 3)), 0.1)
        assert len(grid.query([0.0, 0.0, 0.0], 0.1)) == 0
        i, j = grid.pairs()
        assert len(i) == 0 and len(j) == 0


class TestScenarios:
    def test_dam_2x_particle_count(self):
        grid, particles = build_scenario(dam_config(scale=2.0))
        assert grid.dims == (160, 150, 50)
        # published counts: 665k uniform / 664k jittered, tolerance 0.5%
        assert abs(particles.count - 665_000) / 665_000 < 0.005
        assert abs(particles.count - 664_000) / 664_000 < 0.005

    def test_dam_1x_particle_count(self):
        _, particles = build_scenario(dam_config(scale=1.0))
        assert abs(particles.count - 83_000) / 83_000 < 0.02

    def test_wave_2x_particle_count(self):
        grid, particles = build_scenario(wave_config(scale=2.0))
        assert grid.dims == (150, 84, 10)
        assert abs(particles.count - 186_000) / 186_000 < 0.005

    def test_jitter_preserves_count_and_determinism(self):
        cfg = dam_config(scale=0.5, seed_mode="jittered", rng_seed=9)
        _, a = build_scenario(cfg)
        _, b = build_scenario(dam_config(scale=0.5, seed_mode="jittered", rng_seed=9))
        _, u = build_scenario(dam_config(scale=0.5, seed_mode="uniform"))
        assert a.count == u.count
        assert np.array_equal(a.positions, b.positions)
        assert not np.array_equal(a.positions, u.positions)
        _, c = build_scenario(dam_config(scale=0.5, seed_mode="jittered", rng_seed=10))
        assert not np.array_equal(a.positions, c.positions)

    def test_empty_water_region(self):
        cfg = dam_config(scale=0.5)
        cfg.water_region = Box((0.5, 0.5, 0.5), (0.5, 0.5, 0.5))
        grid, particles = build_scenario(cfg)
        assert particles.count == 0
        assert (grid.cell_flags != CellFlag.FLUID).all()

    def test_all_water_2x2x2_grid_gives_64(self):
        cfg = ScenarioConfig(
            name="dam",
            domain_size=(0.1, 0.1, 0.1),
            water_region=Box((0, 0, 0), (0.1, 0.1, 0.1)),
            grid_dims=(2, 2, 2),
        )
        _, particles = build_scenario(cfg)
        assert particles.count == 64

    def test_water_overlapping_obstacle_rejected(self):
        with pytest.raises(ValueError, match="overlaps"):
            ScenarioConfig(
                name="dam",
                domain_size=(1.0, 1.0, 1.0),
                water_region=Box((0, 0, 0), (0.6, 0.6, 0.6)),
                obstacle=Box((0.5, 0.0, 0.5), (0.7, 0.2, 0.7)),
                grid_dims=(10, 10, 10),
            )

    def test_flags_cover_obstacle_and_water(self):
        grid, _ = build_scenario(dam_config(scale=0.5))
        assert (grid.cell_flags == CellFlag.SOLID).any()
        assert (grid.cell_flags == CellFlag.FLUID).any()
        assert (grid.cell_flags == CellFlag.AIR).any()

    def test_particles_inside_domain(self):
        grid, particles = build_scenario(dam_config(scale=0.5, seed_mode="jittered"))
        assert (particles.positions >= 0).all()
        assert (particles.positions <= grid.extent).all()

    def test_scale_dims(self):
        assert scale_dims((80, 75, 25), 2) == (160, 150, 50)
        assert scale_dims((75, 42, 5), 4) == (300, 168, 20)

    def test_config_roundtrip(self):
        cfg = wave_config(scale=1.0, seed_mode="jittered", rng_seed=3)
        again = ScenarioConfig.from_dict(cfg.to_dict())
        assert again.to_dict() == cfg.to_dict()


class TestWaveMotion:
    def motion(self, amp=0.07, period=1.9):
        return TankMotion(amplitude_rad=amp, period_s=period, axis_point=(0.45, 0.0, 0.031))

    def test_phase_zero_is_identity_with_gravity_at_axis(self):
        frame = wave_tank_motion(0.0, self.motion())
        assert np.allclose(frame.rotation, np.eye(3))
        force = frame.body_force(np.array([[0.45, 0.0, 0.031]]))
        assert np.allclose(force, [[0.0, -9.81, 0.0]], atol=1e-12)

    def test_half_period_has_zero_angle_nonzero_omega(self):
        m = self.motion()
        frame = wave_tank_motion(m.period_s / 2.0, m)
        assert np.allclose(frame.rotation, np.eye(3), atol=1e-12)
        assert abs(frame.omega) > 0.1
        # centrifugal term pushes a point away from the axis
        force = frame.body_force(np.array([[0.9, 0.0, 0.031]]))
        assert force[0, 0] > 0.0

    def test_zero_amplitude_reduces_to_static_tank(self):
        m = self.motion(amp=0.0)
        pts = np.array([[0.1, 0.3, 0.01], [0.8, 0.0, 0.05]])
        for t in (0.0, 0.3, 1.1, 2.7):
            frame = wave_tank_motion(t, m)
            assert np.allclose(frame.rotation, np.eye(3))
            assert np.allclose(frame.body_force(pts), [[0.0, -9.81, 0.0]] * 2)

    def test_quarter_period_rotates_gravity(self):
        m = self.motion()
        frame = wave_tank_motion(m.period_s / 4.0, m)
        g = frame.gravity_rotated
        assert abs(g[0]) > 0.0  # tilted tank sees a horizontal component
        assert g[1] < 0.0
        assert np.linalg.norm(g) == pytest.approx(9.81, rel=1e-12)

    def test_nonpositive_period_rejected(self):
        with pytest.raises(ValueError):
            TankMotion(amplitude_rad=0.1, period_s=0.0, axis_point=(0, 0, 0))


class TestTimestep:
    def test_zero_velocity_clamps_to_frame(self):
        assert cfl_timestep(0.0, 0.02, 1.0) == pytest.approx(1.0 / 30.0)

    def test_arithmetic(self):
        assert cfl_timestep(2.0, 0.02, 1.0) == pytest.approx(0.01)

    def test_scaling(self):
        assert cfl_timestep(4.0, 0.02, 1.0) == pytest.approx(
            cfl_timestep(2.0, 0.02, 1.0) / 2.0
        )

    def test_nan_aborts(self):
        with pytest.raises(NumericalFailure):
            cfl_timestep(float("nan"), 0.02, 1.0)


class TestMacGrid:
    def test_uniform_field_samples_exactly(self):
        grid = MacGrid(dims=(8, 8, 8), cell_size=0.1)
        grid.u[:] = 1.5
        grid.v[:] = -0.5
        grid.w[:] = 0.25
        rng = np.random.default_rng(0)
        pts = rng.uniform(0.05, 0.75, size=(40, 3))
        vel = grid.sample(pts)
        assert np.allclose(vel, [1.5, -0.5, 0.25])

    def test_linear_field_sampled_exactly(self):
        # trilinear interpolation reproduces linear functions exactly
        grid = MacGrid(dims=(8, 8, 8), cell_size=0.1)
        xs = np.arange(9) * 0.1
        grid.u[:] = xs[:, None, None]
        pts = np.array([[0.33, 0.4, 0.4], [0.51, 0.2, 0.6]])
        u = sample_component(grid.u, pts, "u", grid.cell_size)
        assert np.allclose(u, pts[:, 0], atol=1e-12)

    def test_wall_faces_zeroed(self):
        grid = MacGrid(dims=(4, 4, 4), cell_size=0.1)
        grid.u[:] = 1.0
        grid.v[:] = 1.0
        grid.w[:] = 1.0
        grid.cell_flags[2, 2, 2] = CellFlag.SOLID
        grid.enforce_wall_faces()
        assert grid.u[0].max() == 0.0 and grid.u[-1].max() == 0.0
        assert grid.u[2, 2, 2] == 0.0 and grid.u[3, 2, 2] == 0.0
        assert grid.v[2, 2, 2] == 0.0 and grid.v[2, 3, 2] == 0.0

    def test_max_speed_nan_aborts(self):
        grid = MacGrid(dims=(2, 2, 2), cell_size=0.1)
        grid.v[0, 0, 0] = float("nan")
        with pytest.raises(NumericalFailure):
            grid.max_speed()


class TestFrameIO:
    def test_particle_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        fields = {
            "position": rng.uniform(size=(17, 3)).astype(np.float32),
            "velocity": rng.normal(size=(17, 3)).astype(np.float32),
            "density": rng.uniform(900, 1100, size=17).astype(np.float32),
        }
        path = tmp_path / "frame_00000.lbpf"
        write_particle_frame(path, fields)
        back = read_particle_frame(path)
        assert set(back) == set(fields)
        for name in fields:
            assert np.array_equal(back[name], fields[name])

    def test_levelset_roundtrip(self, tmp_path):
        phi = np.random.default_rng(2).normal(size=(5, 6, 7)).astype(np.float32)
        path = tmp_path / "phi.lbls"
        write_levelset(path, phi, 0.25, origin=(0.0, 1.0, 2.0))
        back, cell, origin = read_levelset(path)
        assert cell == 0.25
        assert origin == (0.0, 1.0, 2.0)
        assert np.allclose(back, phi)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + b"\0" * 64)
        with pytest.raises(ValueError):
            read_particle_frame(path)


class TestParticleSet:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ParticleSet(
                positions=np.zeros((3, 3)),
                velocities=np.zeros((2, 3)),
                mass=np.ones(3),
            )

    def test_copy_is_deep(self):
        ps = ParticleSet(np.zeros((2, 3)), np.zeros((2, 3)), np.ones(2))
        cp = ps.copy()
        cp.positions[0, 0] = 5.0
        assert ps.positions[0, 0] == 0.0
