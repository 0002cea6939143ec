"""Lagrangian flow of catalog fields and the tangent (variational) cocycle.

Positions and tangent matrices are advanced jointly by classical fixed-step
RK4.  The integration interval is split at every crossing of a field time
breakpoint, so no step straddles a switching time; within a step the field is
queried at the step's midpoint time.  Catalog fields are constant in time
between breakpoints, so this is exact in t, and leaves the classical order
for the autonomous members.

Positions are wrapped to [0,1) after every full step; tangents live on the
universal cover and are never wrapped.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, IntegrationDivergedError
from .fields import VelocityField
from .torus import wrap

TANGENT_BLOWUP = 1e12


@dataclass
class CocycleState:
    """Flow position paired with the tangent matrix W_t (identity at t0)."""

    position: np.ndarray  # (..., 2)
    tangent: np.ndarray  # (..., 2, 2)


def _segments(field, t0, t1):
    """Split [t0, t1] at crossings of the field's time breakpoints."""
    if not field.time_breakpoints or t0 == t1:
        return [(t0, t1)]
    lo, hi = (t0, t1) if t1 > t0 else (t1, t0)
    cuts = []
    for frac in field.time_breakpoints:
        k = np.ceil(lo - frac)
        while k + frac < hi:
            if k + frac > lo:
                cuts.append(k + frac)
            k += 1.0
    cuts.sort()
    times = [lo] + cuts + [hi]
    if t1 < t0:
        times = times[::-1]
    return list(zip(times[:-1], times[1:]))


def _allocate_steps(segments, steps):
    """Distribute `steps` over segments proportionally, at least one each."""
    total = sum(abs(b - a) for a, b in segments)
    counts = [max(1, int(round(steps * abs(b - a) / total))) for a, b in segments]
    return counts


def _integrate(field: VelocityField, points, t0, t1, steps, with_tangent):
    # Position arithmetic below is identical whether or not the tangent is
    # carried, so advect and advect_cocycle agree bitwise on positions.
    pts = wrap(np.asarray(points, dtype=float))
    if with_tangent:
        tangent = np.broadcast_to(np.eye(2), pts.shape + (2,)).copy()
    if t0 == t1:
        return (pts, tangent) if with_tangent else pts
    segments = _segments(field, t0, t1)
    counts = _allocate_steps(segments, steps)
    for (a, b), count in zip(segments, counts):
        h = (b - a) / count
        for j in range(count):
            t_mid = a + (j + 0.5) * h
            v1 = field.velocity(t_mid, pts)
            p2 = pts + (0.5 * h) * v1
            v2 = field.velocity(t_mid, p2)
            p3 = pts + (0.5 * h) * v2
            v3 = field.velocity(t_mid, p3)
            p4 = pts + h * v3
            v4 = field.velocity(t_mid, p4)
            if with_tangent:
                g1 = field.gradient(t_mid, pts)
                g2 = field.gradient(t_mid, p2)
                g3 = field.gradient(t_mid, p3)
                g4 = field.gradient(t_mid, p4)
                k1 = g1 @ tangent
                k2 = g2 @ (tangent + (0.5 * h) * k1)
                k3 = g3 @ (tangent + (0.5 * h) * k2)
                k4 = g4 @ (tangent + h * k3)
                tangent = tangent + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if not np.all(np.abs(tangent) < TANGENT_BLOWUP):
                    raise IntegrationDivergedError(
                        "tangent entry exceeded 1e12; reduce the step size or the field amplitude"
                    )
            pts = wrap(pts + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4))
    return (pts, tangent) if with_tangent else pts


def _dispatch(field, x, t0, t1, steps, with_tangent):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        from .workers import run_chunked

        return run_chunked(
            lambda chunk: _integrate(field, chunk, t0, t1, steps, with_tangent), x
        )
    return _integrate(field, x, t0, t1, steps, with_tangent)


def advect(field: VelocityField, x, t0: float, t1: float, steps: int):
    """RK4 approximation of the flow X(t1, t0, x); t1 < t0 gives the inverse flow."""
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    return _dispatch(field, x, float(t0), float(t1), steps, with_tangent=False)


def advect_cocycle(field: VelocityField, x, t0: float, t1: float, steps: int) -> CocycleState:
    """Jointly integrate position and tangent matrix along the trajectory."""
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    pos, tangent = _dispatch(field, x, float(t0), float(t1), steps, with_tangent=True)
    return CocycleState(position=pos, tangent=tangent)


def time_one_map(field: VelocityField, steps: int = 256):
    """Wrap the field's period map X_1 as a MeasurePreservingMap."""
    from .maps import TimeOneFlowMap

    return TimeOneFlowMap(field, steps)
