"""Exact discrete hydrostatic equilibria for the SPH solvers.

A resting water column over a lattice-aligned dummy-particle floor is
homogeneous in the two horizontal directions, so its equilibrium is a
one-dimensional problem: find the layer heights where each layer's
vertical pressure force (under the solver's own force law) cancels
gravity. Solving that small root problem and placing particles on the
resulting layer lattice yields a state the full 3-d solver holds
stationary, which is the clean way to test hydrostatic rest for
weakly compressible methods; relaxing by damped dynamics instead
leaves particle-scale packing noise that the stiff equation of state
amplifies into permanent acoustic jitter.

Side-wall dummy particles at fluid-layer heights compress together
with the fluid: a column beside the wall must see exactly the same
neighborhood as an interior one, or the walls acquire spurious
horizontal pressure gradients.
"""

from __future__ import annotations

import numpy as np
import scipy.optimize

from .solvers import (
    SphState,
    body_acceleration,
    compute_density,
    extrapolate_boundary_pressure,
    pressure_acceleration,
)


def _layer_structure(state: SphState):
    """Group particles into horizontal layers by their seeded height."""
    ys = state.particles.positions[:, 1]
    levels = np.unique(np.round(ys / state.params.spacing * 4).astype(int))
    layer_of = np.searchsorted(
        levels, np.round(ys / state.params.spacing * 4).astype(int)
    )
    heights = np.array([ys[layer_of == k].mean() for k in range(len(levels))])
    return layer_of, heights


def _wall_layer_map(state: SphState, heights0):
    """Boundary particles sitting at fluid-layer heights (side walls)."""
    by = state.boundary.positions[:, 1]
    idx = np.full(len(by), -1, dtype=np.int64)
    for k, h in enumerate(heights0):
        idx[np.abs(by - h) < 1e-9] = k
    return idx


def _apply_heights(state: SphState, layer_of, wall_map, heights):
    state.particles.positions[:, 1] = heights[layer_of]
    moved = wall_map >= 0
    state.boundary.positions[moved, 1] = heights[wall_map[moved]]
    state._boundary_grid = None  # boundary moved; rebuild its search grid


def _vertical_residual(state: SphState, layer_of, wall_map, heights) -> np.ndarray:
    """Mean vertical acceleration per layer at the candidate heights."""
    ps = state.particles
    _apply_heights(state, layer_of, wall_map, heights)
    pairs = state.rebuild_pairs()
    prm = state.params
    rho = compute_density(ps, state.boundary, state.kernel, pairs)
    ps.density = np.maximum(rho, prm.rest_density)
    ps.pressure = np.maximum(
        prm.stiffness * ((rho / prm.rest_density) ** prm.tait_gamma - 1.0), 0.0
    )
    gravity = body_acceleration(state)
    if state.method == "sph":
        pb = extrapolate_boundary_pressure(state, pairs, gravity)
        accel = gravity + pressure_acceleration(state, pairs, boundary_pressure=pb)
    else:
        accel = gravity + pressure_acceleration(state, pairs)
    return np.array([accel[layer_of == k, 1].mean() for k in range(len(heights))])


def relax_to_hydrostatic(state: SphState, tol: float = 1e-10) -> SphState:
    """Move the column's layers onto the solver's force-free heights.

    Only vertical coordinates change (the horizontal lattice structure
    is what cancels tangential forces); velocities are zeroed. On
    solver failure the original positions are restored.
    """
    ps = state.particles
    original = ps.positions.copy()
    original_boundary = state.boundary.positions.copy()
    layer_of, heights0 = _layer_structure(state)
    wall_map = _wall_layer_map(state, heights0)
    # start inside the compressed regime: the pressure clamp makes the
    # uncompressed lattice a zero-gradient plateau for the root solver
    prm = state.params
    g = abs(state.config.gravity[1])
    top = heights0.max() + 0.5 * prm.spacing
    squeeze = g * (top - heights0 / 2.0) / prm.sound_speed**2
    x0 = heights0 * (1.0 - 2.0 * squeeze)

    def residual(h):
        return _vertical_residual(state, layer_of, wall_map, np.sort(h))

    sol = scipy.optimize.least_squares(
        residual, x0, diff_step=1e-4, xtol=1e-14, ftol=1e-14, gtol=1e-14
    )
    heights = np.sort(sol.x)
    converged = np.abs(sol.fun).max() < 1e-4 * g and np.all(np.diff(heights) > 0)
    if converged:
        _apply_heights(state, layer_of, wall_map, heights)
    else:
        ps.positions = original
        state.boundary.positions = original_boundary
        state._boundary_grid = None
    ps.velocities[:] = 0.0
    # leave density/pressure consistent with the final positions
    pairs = state.rebuild_pairs()
    rho = compute_density(ps, state.boundary, state.kernel, pairs)
    ps.density = np.maximum(rho, state.params.rest_density)
    ps.pressure = np.maximum(
        state.params.stiffness
        * ((rho / state.params.rest_density) ** state.params.tait_gamma - 1.0),
        0.0,
    )
    return state
