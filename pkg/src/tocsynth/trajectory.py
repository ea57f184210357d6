"""Closed-form arc kinematics and dense sampling of plans.

Every arc is evaluated from its closed form; a sampling step only controls
density and never introduces integrator error.

Arc families:

* bang (``u = +1`` or ``u = -1``): ``y(t) = y0 + u*t``,
  ``x(t) = x0 + y0*t + u*t^2/2``; as a curve, ``x = x0 + (y^2 - y0^2)/(2u)``.
* boundary slide (sloped bound): on ``y = k*x - b`` the feedback ``u = k*y``
  gives ``y(t) = y0*exp(k*t)``, feasible only while ``|k*y| <= 1``.
* rest (horizontal bound): ``u = 0`` along ``y = -b``, so ``x(t) = x0 - b*t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DirectionMismatch, OffBoundary, OutOfSlideRange
from .problem import Boundary, ProblemSpec, State, gamma_x

#: residual tolerance for "on the boundary" preconditions
ON_BOUNDARY_ATOL = 1e-9
#: arcs shorter than this are dropped from plans
ZERO_DURATION = 1e-12


class ControlMode(str, Enum):
    MINUS = "minus"
    PLUS = "plus"
    SLIDE = "slide"
    REST = "rest"


@dataclass(frozen=True)
class ArcPlan:
    mode: ControlMode
    start: State
    end: State
    duration: float

    def __post_init__(self):
        if not (self.duration >= 0.0 and math.isfinite(self.duration)):
            raise ValueError(f"arc duration must be finite and nonnegative, got {self.duration}")


def bang_arc(s: State, u: float, y_target: float) -> ArcPlan:
    """Constant-control arc from ``s`` until velocity ``y_target``."""
    if u not in (1.0, -1.0):
        raise ValueError(f"bang control must be +1 or -1, got {u}")
    dy = y_target - s.y
    if dy * u < -ZERO_DURATION:
        raise DirectionMismatch(
            f"cannot reach y={y_target} from y={s.y} with u={u:+g}")
    duration = abs(dy)
    end_x = s.x + (y_target * y_target - s.y * s.y) / (2.0 * u)
    return ArcPlan(ControlMode.MINUS if u < 0 else ControlMode.PLUS,
                   s, State(end_x, y_target), duration)


def slide_arc(spec: ProblemSpec, s: State, target: float) -> ArcPlan:
    """Boundary-slide arc.

    For a sloped bound ``target`` is the exit velocity; duration is
    ``log(target / s.y) / k`` (positive for both slide directions by the
    regime geometry).  For a horizontal bound ``target`` is the exit position
    and the mode is ``rest`` with duration ``(s.x - target) / b``.
    """
    if spec.boundary == Boundary.HORIZONTAL:
        b = spec.b
        if abs(s.y + b) > ON_BOUNDARY_ATOL:
            raise OffBoundary(f"state y={s.y} is not on the bound y={-b}")
        duration = (s.x - target) / b
        if duration < -ZERO_DURATION:
            raise OutOfSlideRange("horizontal rest arcs move left; target is to the right")
        return ArcPlan(ControlMode.REST, s, State(target, -b), max(duration, 0.0))
    if spec.boundary != Boundary.SLOPED:
        raise OffBoundary(f"boundary {spec.boundary.value} admits no slide arc")

    k, b = spec.k, spec.b
    if abs(s.y - k * s.x + b) > ON_BOUNDARY_ATOL * (1.0 + abs(s.y) + abs(k * s.x)):
        raise OffBoundary(f"state {s} is not on the bound line")
    if s.y * target <= 0.0:
        raise OutOfSlideRange("slide endpoints must have the same velocity sign")
    tol = ON_BOUNDARY_ATOL
    for y in (s.y, target):
        if abs(k * y) > 1.0 + tol:
            raise OutOfSlideRange(
                f"slide velocity y={y} exceeds the saturation level 1/|k|")
    duration = math.log(target / s.y) / k
    if duration < -ZERO_DURATION:
        raise OutOfSlideRange("slide target lies against the slide direction")
    return ArcPlan(ControlMode.SLIDE, s, State(gamma_x(spec, target), target),
                   max(duration, 0.0))


def arc_control(spec: ProblemSpec, arc: ArcPlan, tau: float) -> float:
    if arc.mode == ControlMode.MINUS:
        return -1.0
    if arc.mode == ControlMode.PLUS:
        return 1.0
    if arc.mode == ControlMode.REST:
        return 0.0
    y = arc.start.y * math.exp(spec.k * tau)
    return max(-1.0, min(1.0, spec.k * y))


def arc_state(spec: ProblemSpec, arc: ArcPlan, tau: float) -> State:
    """State on the arc at local time ``tau`` in ``[0, duration]``."""
    tau = min(max(tau, 0.0), arc.duration)
    x0, y0 = arc.start.x, arc.start.y
    if arc.mode == ControlMode.MINUS:
        return State(x0 + y0 * tau - 0.5 * tau * tau, y0 - tau)
    if arc.mode == ControlMode.PLUS:
        return State(x0 + y0 * tau + 0.5 * tau * tau, y0 + tau)
    if arc.mode == ControlMode.REST:
        return State(x0 - spec.b * tau, -spec.b)
    y = y0 * math.exp(spec.k * tau)
    return State(gamma_x(spec, y), y)


def _arc_states_many(spec: ProblemSpec, arc: ArcPlan, taus: np.ndarray):
    taus = np.clip(taus, 0.0, arc.duration)
    x0, y0 = arc.start.x, arc.start.y
    if arc.mode == ControlMode.MINUS:
        return x0 + y0 * taus - 0.5 * taus**2, y0 - taus, np.full_like(taus, -1.0)
    if arc.mode == ControlMode.PLUS:
        return x0 + y0 * taus + 0.5 * taus**2, y0 + taus, np.full_like(taus, 1.0)
    if arc.mode == ControlMode.REST:
        return x0 - spec.b * taus, np.full_like(taus, -spec.b), np.zeros_like(taus)
    ys = y0 * np.exp(spec.k * taus)
    us = np.clip(spec.k * ys, -1.0, 1.0)
    return (ys + spec.b) / spec.k, ys, us


@dataclass(frozen=True)
class SampledPath:
    """Dense samples of a plan: times from 0, states, and applied controls."""

    times: np.ndarray
    states: np.ndarray  # shape (n, 2)
    controls: np.ndarray


def sample(plan, dt: float) -> SampledPath:
    """Sample a plan on a ``dt`` grid, always including every arc junction.

    Between junctions states come from each arc's closed form.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    knots = plan.switch_times  # includes 0 and total_time
    total = plan.total_time
    grid = np.arange(0.0, total, dt)
    times = np.union1d(np.asarray(knots), grid)
    # collapse grid points that collide with junctions to the exact junction
    keep = [0]
    for i in range(1, len(times)):
        if times[i] - times[keep[-1]] > 1e-12:
            keep.append(i)
    times = times[keep]
    if times[-1] < total - 1e-12:
        times = np.append(times, total)
    else:
        times[-1] = total

    xs = np.empty_like(times)
    ys = np.empty_like(times)
    us = np.empty_like(times)
    if not plan.arcs:
        return SampledPath(np.array([0.0]), np.zeros((1, 2)),
                           np.array([0.0]))
    starts = np.asarray(knots[:-1])
    idx = np.minimum(np.searchsorted(np.asarray(knots[1:]), times, side="right"),
                     len(plan.arcs) - 1)
    for j, arc in enumerate(plan.arcs):
        sel = idx == j
        if not np.any(sel):
            continue
        x, y, u = _arc_states_many(plan.spec, arc, times[sel] - starts[j])
        xs[sel], ys[sel], us[sel] = x, y, u
    return SampledPath(times, np.column_stack([xs, ys]), us)
