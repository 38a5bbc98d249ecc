"""Particle-only solvers: WCSPH, IISPH, and wall-boundary SPH.

All three share the density summation, the symmetric pressure force,
Monaghan-style artificial viscosity, and static boundary particles;
they differ in how pressure is obtained:

* WCSPH: stiff Tait equation of state, explicit and cheap per step but
  time-step limited by the artificial speed of sound.
* IISPH: relaxed-Jacobi iteration on a discretized pressure Poisson
  equation until the predicted density error drops below tolerance,
  which buys much larger stable steps.
* wall-boundary SPH: weakly compressible like WCSPH, but boundary
  particles receive pressure extrapolated from the fluid, giving
  accurate wall pressures instead of mirrored ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.grid import NumericalFailure
from ..core.kernels import SphKernel
from ..core.neighbors import NeighborGrid
from ..core.particles import Box, ParticleSet
from ..core.scenario import ScenarioConfig, build_scenario, wave_tank_motion
from .boundary import BoundaryParticleSet, build_boundary

LAGRANGIAN_METHODS = ("wcsph", "iisph", "sph")

DENSITY_ABORT_FRACTION = 0.10   # WCSPH density fluctuation guard


@dataclass
class SphParams:
    spacing: float
    rest_density: float = 1000.0
    tait_gamma: float = 7.0
    sound_speed: float = 20.0            # c0; stiffness B = rho0 c0^2 / gamma
    artificial_viscosity: float = 0.08
    jacobi_omega: float = 0.5
    compression_tolerance: float = 0.001  # average density error target
    max_pressure_iterations: int = 100
    no_slip: bool = False                 # wall-boundary SPH viscosity vs walls

    def __post_init__(self):
        if not self.rest_density > 0:
            raise ValueError("rest density must be positive")
        if not 0.0 < self.compression_tolerance <= 0.05:
            raise ValueError("compression tolerance must be in (0, 0.05]")

    @property
    def support_radius(self) -> float:
        return 2.0 * self.spacing

    @property
    def stiffness(self) -> float:
        return self.rest_density * self.sound_speed**2 / self.tait_gamma


@dataclass
class PairCache:
    """Per-substep neighbor pairs with precomputed kernel terms."""

    ff_i: np.ndarray
    ff_j: np.ndarray
    ff_grad: np.ndarray     # grad W at x_i - x_j
    ff_w: np.ndarray
    ff_rvec: np.ndarray
    fb_i: np.ndarray
    fb_b: np.ndarray
    fb_grad: np.ndarray
    fb_w: np.ndarray
    fb_rvec: np.ndarray


@dataclass
class SphState:
    method: str
    config: ScenarioConfig
    particles: ParticleSet
    boundary: BoundaryParticleSet
    params: SphParams
    kernel: SphKernel
    time: float = 0.0
    substep_index: int = 0
    frame_index: int = 0
    last_pressure_iterations: int = 0
    _boundary_grid: NeighborGrid = None

    def max_speed(self) -> float:
        return self.particles.max_speed()

    def rebuild_pairs(self) -> PairCache:
        ps = self.particles
        h = self.params.support_radius
        fluid_grid = NeighborGrid(ps.positions, h)
        if self._boundary_grid is None:
            self._boundary_grid = NeighborGrid(self.boundary.positions, h)
        i, j = fluid_grid.pairs()
        rvec = ps.positions[i] - ps.positions[j]
        r = np.linalg.norm(rvec, axis=1)
        fb_i, fb_b = fluid_grid.pairs_with(self._boundary_grid)
        brvec = ps.positions[fb_i] - self.boundary.positions[fb_b]
        br = np.linalg.norm(brvec, axis=1)
        return PairCache(
            ff_i=i, ff_j=j,
            ff_grad=self.kernel.grad_w(rvec, r),
            ff_w=self.kernel.w(r),
            ff_rvec=rvec,
            fb_i=fb_i, fb_b=fb_b,
            fb_grad=self.kernel.grad_w(brvec, br),
            fb_w=self.kernel.w(br),
            fb_rvec=brvec,
        )


def make_sph_state(method: str, config: ScenarioConfig,
                   params: SphParams | None = None) -> SphState:
    if method not in LAGRANGIAN_METHODS:
        raise ValueError(f"unknown Lagrangian method {method!r}")
    grid, particles = build_scenario(config)
    if params is None:
        # keep density fluctuation ~O(1%) : c0 well above the fastest
        # gravity-driven speed of the initial column
        height = float(config.water_region.size[1])
        g = float(np.linalg.norm(config.gravity))
        c0 = max(20.0, 10.0 * np.sqrt(2.0 * g * max(height, 1e-6)))
        params = SphParams(spacing=config.particle_spacing,
                           rest_density=config.rest_density,
                           sound_speed=c0)
    kernel = SphKernel(params.support_radius)
    boundary = build_boundary(
        domain=config.grid_box,
        spacing=params.spacing,
        rest_density=params.rest_density,
        support_radius=params.support_radius,
        kernel=kernel,
        obstacle=config.obstacle,
    )
    particles.ensure_sph_fields(params.rest_density)
    return SphState(
        method=method,
        config=config,
        particles=particles,
        boundary=boundary,
        params=params,
        kernel=kernel,
    )


def _scatter_pairs(n, i, j, term_i, term_j):
    """Accumulate per-pair vector terms onto particles i and j."""
    out = np.zeros((n, 3))
    for axis in range(3):
        out[:, axis] += np.bincount(i, weights=term_i[:, axis], minlength=n)
        out[:, axis] += np.bincount(j, weights=term_j[:, axis], minlength=n)
    return out


def compute_density(ps: ParticleSet, boundary: BoundaryParticleSet,
                    kernel: SphKernel, pairs: PairCache) -> np.ndarray:
    """rho_i = sum_j m_j W_ij with self term and boundary pseudo-mass."""
    n = ps.count
    rho = ps.mass * kernel.w(0.0)
    rho += np.bincount(pairs.ff_i, weights=ps.mass[pairs.ff_j] * pairs.ff_w, minlength=n)
    rho += np.bincount(pairs.ff_j, weights=ps.mass[pairs.ff_i] * pairs.ff_w, minlength=n)
    if len(pairs.fb_i):
        rho += np.bincount(
            pairs.fb_i,
            weights=boundary.pseudo_mass[pairs.fb_b] * pairs.fb_w,
            minlength=n,
        )
    return rho


def pressure_acceleration(state: SphState, pairs: PairCache,
                          boundary_pressure: np.ndarray | None = None) -> np.ndarray:
    """Symmetric SPH pressure force per unit mass.

    Fluid-fluid pairs are exactly antisymmetric (momentum conserving).
    Boundary terms use the given boundary pressures, or mirror the
    fluid particle's own pressure when none are supplied.
    """
    ps = state.particles
    n = ps.count
    rho = ps.density
    p = ps.pressure
    i, j = pairs.ff_i, pairs.ff_j
    coef = p[i] / rho[i] ** 2 + p[j] / rho[j] ** 2
    term = coef[:, None] * pairs.ff_grad
    accel = _scatter_pairs(
        n, i, j,
        -ps.mass[j][:, None] * term,
        ps.mass[i][:, None] * term,
    )
    if len(pairs.fb_i):
        b = pairs.fb_b
        fi = pairs.fb_i
        if boundary_pressure is None:
            # mirror with hydrostatic correction: a dummy below a fluid
            # particle must read deeper pressure or vertical walls and
            # floors exert spurious tangential forces
            g = np.asarray(state.config.gravity)
            pb = np.maximum(
                p[fi] + rho[fi] * (pairs.fb_rvec @ g), 0.0
            )
            rho_b = rho[fi]
        else:
            pb = boundary_pressure[b]
            rho_b = np.full(len(b), state.params.rest_density)
        coef_b = p[fi] / rho[fi] ** 2 + pb / rho_b**2
        contrib = -(state.boundary.pseudo_mass[b] * coef_b)[:, None] * pairs.fb_grad
        for axis in range(3):
            accel[:, axis] += np.bincount(fi, weights=contrib[:, axis], minlength=n)
    return accel


def viscosity_acceleration(state: SphState, pairs: PairCache,
                           include_boundary: bool | None = None) -> np.ndarray:
    """Monaghan artificial viscosity; dissipates approach velocity only."""
    ps = state.particles
    prm = state.params
    n = ps.count
    if prm.artificial_viscosity == 0.0:
        return np.zeros((n, 3))
    h = prm.spacing
    i, j = pairs.ff_i, pairs.ff_j
    vij = ps.velocities[i] - ps.velocities[j]
    dot = np.einsum("nd,nd->n", vij, pairs.ff_rvec)
    r2 = np.einsum("nd,nd->n", pairs.ff_rvec, pairs.ff_rvec)
    mu = h * dot / (r2 + 0.01 * h * h)
    approaching = dot < 0.0
    rho_bar = 0.5 * (ps.density[i] + ps.density[j])
    pi_ij = np.where(
        approaching, -prm.artificial_viscosity * prm.sound_speed * mu / rho_bar, 0.0
    )
    term = pi_ij[:, None] * pairs.ff_grad
    accel = _scatter_pairs(
        n, i, j,
        -ps.mass[j][:, None] * term,
        ps.mass[i][:, None] * term,
    )
    if include_boundary is None:
        include_boundary = prm.no_slip
    if include_boundary and len(pairs.fb_i):
        fi, b = pairs.fb_i, pairs.fb_b
        vib = ps.velocities[fi]  # walls are static
        dot = np.einsum("nd,nd->n", vib, pairs.fb_rvec)
        r2 = np.einsum("nd,nd->n", pairs.fb_rvec, pairs.fb_rvec)
        mu = h * dot / (r2 + 0.01 * h * h)
        pi_ib = np.where(dot < 0.0,
                         -prm.artificial_viscosity * prm.sound_speed * mu / ps.density[fi],
                         0.0)
        contrib = -(state.boundary.pseudo_mass[b] * pi_ib)[:, None] * pairs.fb_grad
        for axis in range(3):
            accel[:, axis] += np.bincount(fi, weights=contrib[:, axis], minlength=n)
    return accel


def body_acceleration(state: SphState) -> np.ndarray:
    cfg = state.config
    if cfg.motion is None or cfg.motion.amplitude_rad == 0.0:
        return np.broadcast_to(np.asarray(cfg.gravity), (state.particles.count, 3))
    frame = wave_tank_motion(state.time, cfg.motion, cfg.gravity)
    return frame.body_force(state.particles.positions)


def enforce_domain(state: SphState):
    # safety net only: the dummy wall particles do the real containment,
    # and a large margin would fight the hydrostatic compression of the
    # bottom particle layer
    ps = state.particles
    margin = 0.05 * state.params.spacing
    extent = state.config.grid_box.hi
    for axis in range(3):
        low = ps.positions[:, axis] < margin
        high = ps.positions[:, axis] > extent[axis] - margin
        ps.positions[low, axis] = margin
        ps.positions[high, axis] = extent[axis] - margin
        ps.velocities[low, axis] = np.maximum(ps.velocities[low, axis], 0.0)
        ps.velocities[high, axis] = np.minimum(ps.velocities[high, axis], 0.0)
    obstacle = state.config.obstacle
    if obstacle is not None and ps.count:
        inside = obstacle.contains(ps.positions)
        if inside.any():
            pts = ps.positions[inside]
            dist_lo = pts - obstacle.lo
            dist_hi = obstacle.hi - pts
            axis_pick = np.argmin(np.minimum(dist_lo, dist_hi), axis=1)
            for axis in range(3):
                sel = axis_pick == axis
                if sel.any():
                    go_low = dist_lo[sel, axis] < dist_hi[sel, axis]
                    pts[sel, axis] = np.where(
                        go_low, obstacle.lo[axis] - margin, obstacle.hi[axis] + margin
                    )
            ps.positions[inside] = pts
            ps.velocities[inside] = 0.0


def _integrate(state: SphState, accel: np.ndarray, dt: float):
    ps = state.particles
    ps.velocities = ps.velocities + accel * dt
    ps.positions = ps.positions + ps.velocities * dt
    enforce_domain(state)
    if not np.isfinite(ps.positions).all() or not np.isfinite(ps.velocities).all():
        raise NumericalFailure("SPH state went non-finite", frame=state.frame_index)


def step_wcsph(state: SphState, dt: float) -> SphState:
    ps = state.particles
    prm = state.params
    pairs = state.rebuild_pairs()
    rho = compute_density(ps, state.boundary, state.kernel, pairs)
    fluctuation = rho.max() / prm.rest_density - 1.0
    if fluctuation > DENSITY_ABORT_FRACTION:
        raise NumericalFailure(
            f"WCSPH density fluctuation {fluctuation:.1%} exceeds "
            f"{DENSITY_ABORT_FRACTION:.0%}: stiffness or time step misconfigured",
            frame=state.frame_index,
        )
    ps.density = np.maximum(rho, prm.rest_density)  # free-surface clamp
    ps.pressure = np.maximum(
        prm.stiffness * ((rho / prm.rest_density) ** prm.tait_gamma - 1.0), 0.0
    )
    accel = body_acceleration(state) + pressure_acceleration(state, pairs)
    accel = accel + viscosity_acceleration(state, pairs)
    _integrate(state, accel, dt)
    state.time += dt
    state.substep_index += 1
    return state


def step_sph_wall(state: SphState, dt: float) -> SphState:
    """Weakly compressible update with wall pressure extrapolation."""
    ps = state.particles
    prm = state.params
    pairs = state.rebuild_pairs()
    rho = compute_density(ps, state.boundary, state.kernel, pairs)
    ps.density = np.maximum(rho, prm.rest_density)
    ps.pressure = np.maximum(
        prm.stiffness * ((rho / prm.rest_density) ** prm.tait_gamma - 1.0), 0.0
    )
    gravity = body_acceleration(state)
    pb = extrapolate_boundary_pressure(state, pairs, gravity)
    state.boundary.pressure = pb
    accel = gravity + pressure_acceleration(state, pairs, boundary_pressure=pb)
    accel = accel + viscosity_acceleration(state, pairs)
    _integrate(state, accel, dt)
    state.time += dt
    state.substep_index += 1
    return state


def extrapolate_boundary_pressure(state: SphState, pairs: PairCache,
                                  gravity: np.ndarray) -> np.ndarray:
    """Shepard-style extrapolation of fluid pressure onto wall particles.

    p_b = [sum_f p_f W_bf + g . sum_f rho_f (x_b - x_f) W_bf] / sum_f W_bf,
    which reproduces the hydrostatic profile across the half-spacing gap
    between the last fluid layer and the wall samples.
    """
    ps = state.particles
    nb = state.boundary.count
    if not len(pairs.fb_i):
        return np.zeros(nb)
    fi, b = pairs.fb_i, pairs.fb_b
    w = pairs.fb_w
    num = np.bincount(b, weights=ps.pressure[fi] * w, minlength=nb)
    # hydrostatic correction: r points from fluid to boundary
    gdotr = np.einsum("nd,nd->n", gravity[fi], -pairs.fb_rvec)
    num += np.bincount(b, weights=ps.density[fi] * gdotr * w, minlength=nb)
    den = np.bincount(b, weights=w, minlength=nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        pb = np.where(den > 0, num / np.maximum(den, 1e-300), 0.0)
    return np.maximum(pb, 0.0)


def step_iisph(state: SphState, dt: float) -> SphState:
    """Implicit pressure via relaxed Jacobi on the predicted density.

    Iterates p until the average positive density error falls below the
    compression tolerance. The residual is evaluated with the exact
    discrete pressure-force operator, so converged states satisfy the
    same force balance the explicit solvers use.
    """
    ps = state.particles
    prm = state.params
    n = ps.count
    pairs = state.rebuild_pairs()
    rho = compute_density(ps, state.boundary, state.kernel, pairs)
    ps.density = np.maximum(rho, prm.rest_density)

    accel_ext = body_acceleration(state) + viscosity_acceleration(state, pairs)
    v_adv = ps.velocities + accel_ext * dt
    rho_adv = rho + dt * _velocity_divergence_term(state, pairs, v_adv)

    diag = _iisph_diagonal(state, pairs, dt)
    p = ps.pressure.copy()
    iterations = 0
    for iterations in range(1, prm.max_pressure_iterations + 1):
        ps.pressure = p
        a_p = pressure_acceleration(state, pairs)
        rho_pred = rho_adv + dt * dt * _velocity_divergence_term(state, pairs, a_p)
        err = rho_pred - prm.rest_density
        avg_err = float(np.maximum(err, 0.0).mean()) / prm.rest_density
        # at least two sweeps: warm-started pressure may overshoot, and
        # the compression-only stopping metric cannot see that
        if avg_err < prm.compression_tolerance and iterations > 2:
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            dp = np.where(np.abs(diag) > 1e-300,
                          prm.jacobi_omega * (prm.rest_density - rho_pred) / diag, 0.0)
        p = np.maximum(p + dp, 0.0)
    state.last_pressure_iterations = iterations
    ps.pressure = p
    a_p = pressure_acceleration(state, pairs)
    ps.velocities = v_adv + a_p * dt
    ps.positions = ps.positions + ps.velocities * dt
    enforce_domain(state)
    if not np.isfinite(ps.positions).all():
        raise NumericalFailure("IISPH state went non-finite", frame=state.frame_index)
    state.time += dt
    state.substep_index += 1
    return state


def _velocity_divergence_term(state: SphState, pairs: PairCache,
                              field: np.ndarray) -> np.ndarray:
    """sum_j m_j (f_i - f_j) . grad W_ij, plus boundary terms (walls static)."""
    ps = state.particles
    n = ps.count
    i, j = pairs.ff_i, pairs.ff_j
    diff = field[i] - field[j]
    dot = np.einsum("nd,nd->n", diff, pairs.ff_grad)
    out = np.bincount(i, weights=ps.mass[j] * dot, minlength=n)
    # same dot enters j's sum with both sign flips cancelling
    out += np.bincount(j, weights=ps.mass[i] * dot, minlength=n)
    if len(pairs.fb_i):
        fi, b = pairs.fb_i, pairs.fb_b
        dot_b = np.einsum("nd,nd->n", field[fi], pairs.fb_grad)
        out += np.bincount(fi, weights=state.boundary.pseudo_mass[b] * dot_b,
                           minlength=n)
    return out


def _iisph_diagonal(state: SphState, pairs: PairCache, dt: float) -> np.ndarray:
    """d(rho_pred)/dp_i of the relaxed Jacobi iteration (negative)."""
    ps = state.particles
    prm = state.params
    n = ps.count
    inv_rho2 = 1.0 / ps.density**2
    # d_ii = -dt^2 / rho_i^2 * (sum_j m_j grad W_ij + 2 sum_b psi_b grad W_ib)
    grad_sum = np.zeros((n, 3))
    i, j = pairs.ff_i, pairs.ff_j
    for axis in range(3):
        grad_sum[:, axis] += np.bincount(
            i, weights=ps.mass[j] * pairs.ff_grad[:, axis], minlength=n
        )
        grad_sum[:, axis] -= np.bincount(
            j, weights=ps.mass[i] * pairs.ff_grad[:, axis], minlength=n
        )
    if len(pairs.fb_i):
        fi, b = pairs.fb_i, pairs.fb_b
        for axis in range(3):
            grad_sum[:, axis] += 2.0 * np.bincount(
                fi, weights=state.boundary.pseudo_mass[b] * pairs.fb_grad[:, axis],
                minlength=n,
            )
    d_ii = -(dt * dt) * inv_rho2[:, None] * grad_sum

    diag = np.zeros(n)
    dot_ii = np.einsum("nd,nd->n", d_ii[i], pairs.ff_grad)
    dot_jj = np.einsum("nd,nd->n", d_ii[j], pairs.ff_grad)
    # d_ji = dt^2 m_i / rho_i^2 grad W_ij (reaction of j to p_i)
    dji_dot = (dt * dt) * inv_rho2[i] * ps.mass[i] * np.einsum(
        "nd,nd->n", pairs.ff_grad, pairs.ff_grad
    )
    diag += np.bincount(i, weights=ps.mass[j] * (dot_ii - dji_dot), minlength=n)
    djj_dot = (dt * dt) * inv_rho2[j] * ps.mass[j] * np.einsum(
        "nd,nd->n", pairs.ff_grad, pairs.ff_grad
    )
    diag += np.bincount(j, weights=ps.mass[i] * (-dot_jj - djj_dot), minlength=n)
    if len(pairs.fb_i):
        fi, b = pairs.fb_i, pairs.fb_b
        dot_bb = np.einsum("nd,nd->n", d_ii[fi], pairs.fb_grad)
        diag += np.bincount(fi, weights=state.boundary.pseudo_mass[b] * dot_bb,
                            minlength=n)
    return diag


STEP_FUNCTIONS = {
    "wcsph": step_wcsph,
    "iisph": step_iisph,
    "sph": step_sph_wall,
}


def step(state: SphState, dt: float) -> SphState:
    return STEP_FUNCTIONS[state.method](state, dt)


def stable_dt(state: SphState, cfl: float = 0.4, frame_dt: float = 1.0 / 30.0) -> float:
    """CFL bound: acoustic for the weakly compressible solvers, kinematic
    plus body-force limited for the implicit one."""
    prm = state.params
    vmax = state.max_speed()
    a_max = max(float(np.linalg.norm(state.config.gravity)), 1e-9)
    dt_force = 0.25 * np.sqrt(prm.spacing / a_max)
    if state.method in ("wcsph", "sph"):
        dt = cfl * prm.spacing / max(prm.sound_speed + vmax, 1e-9)
    else:
        dt = min(cfl * prm.spacing / max(vmax, 1e-9), dt_force)
    return min(dt, frame_dt)


def settle(state: SphState, steps: int, dt: float, damping: float = 0.9):
    """Damped pre-run used to prepare hydrostatic initial conditions."""
    for _ in range(steps):
        step(state, dt)
        state.particles.velocities *= damping
    state.particles.velocities[:] = 0.0
    return state
