"""Adaptive CFL time stepping toward fixed frame boundaries."""

from __future__ import annotations

import math

from .grid import NumericalFailure

FRAME_DT = 1.0 / 30.0
DT_MIN = 1e-6
EULERIAN_CFL = 1.0
SPH_CFL = 0.4


def cfl_timestep(
    max_speed: float,
    spacing: float,
    cfl: float,
    frame_dt: float = FRAME_DT,
    dt_min: float = DT_MIN,
) -> float:
    """dt = cfl * spacing / max_speed, clamped to [dt_min, frame_dt]."""
    if math.isnan(max_speed) or math.isinf(max_speed):
        raise NumericalFailure(f"non-finite speed {max_speed} in time-step control")
    if spacing <= 0 or cfl <= 0 or frame_dt <= 0:
        raise ValueError("spacing, cfl and frame_dt must be positive")
    if max_speed <= 0:
        return frame_dt
    return min(frame_dt, max(dt_min, cfl * spacing / max_speed))


def substeps_for_frame(state_speed, spacing, cfl, frame_dt=FRAME_DT, dt_min=DT_MIN):
    """Yield dt values covering exactly one frame.

    `state_speed` is called before each substep and must return the
    current maximum speed, so the step size adapts inside the frame.
    """
    t = 0.0
    while t < frame_dt - 1e-12:
        dt = cfl_timestep(state_speed(), spacing, cfl, frame_dt, dt_min)
        dt = min(dt, frame_dt - t)
        yield dt
        t += dt
