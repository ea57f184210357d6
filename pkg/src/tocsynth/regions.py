"""Admissibility of start states and synthesis-region labels.

A start is admissible when some constraint-respecting trajectory reaches the
origin.  For each regime the admissible set and its partition into regions
with distinct optimal arc structures are known in closed form; membership is
decided by sign tests on a few curve residuals.

Conventions:

* Curve membership uses the absolute tolerance ``ATOL`` on the defining
  residual; strictly inside/outside is the residual sign beyond ``ATOL``.
* A state exactly on a switching parabola separating two regions gets the
  label of the region whose first control arc continues tangentially along
  that parabola (so the feedback law is single-valued).
* For a positive slope, the half-parabola through ``E`` (label
  ``boundary_parabola_ee_prime``) together with everything to its right and
  above the bound line is unreachable; those labels are forbidden.  The
  admissible set is not closed there.  For a negative slope and the
  horizontal/vertical limits the admissible set is closed.
"""

from __future__ import annotations

import numpy as np

from .problem import (
    Boundary,
    ProblemSpec,
    Regime,
    State,
    characteristic_points,
    classify_regime,
    constraint_residual,
)

from enum import Enum

#: absolute tolerance for curve-membership residuals
ATOL = 1e-9


class Region(str, Enum):
    FORBIDDEN = "forbidden"
    # k > 0, C above A
    OMEGA1 = "omega1"
    OMEGA2_INTERIOR = "omega2_interior"
    SEGMENT_CE = "segment_ce"
    BOUNDARY_PARABOLA_EE = "boundary_parabola_ee_prime"
    # k > 0, C = A = B
    W1 = "w1"
    W2_INTERIOR = "w2_interior"
    # k > 0, C below A
    Q1 = "q1"
    Q2_INTERIOR = "q2_interior"
    SEGMENT_AE = "segment_ae"
    # k < 0, three crossings
    OMEGA2 = "omega2"
    OMEGA3 = "omega3"
    OMEGA4 = "omega4"
    PARABOLA_CC2 = "parabola_cc_dprime"
    # k < 0, two crossings
    W2 = "w2"
    W3 = "w3"
    # k < 0, one crossing
    Q2 = "q2"
    # horizontal / unconstrained
    LEFT_OF_S = "left_of_s"
    RIGHT_OF_S = "right_of_s"
    ON_GAMMA = "on_gamma"
    ORIGIN = "origin"
    # vertical
    ADMISSIBLE = "admissible"

    @property
    def admissible(self) -> bool:
        return self not in (Region.FORBIDDEN, Region.BOUNDARY_PARABOLA_EE)


def switching_curve_x(y: float) -> float:
    """x-coordinate of the free-problem switching curve at velocity ``y``."""
    return 0.5 * y * y if y <= 0 else -0.5 * y * y


def s_side(x: float, y: float) -> float:
    """Signed offset from the switching curve (positive to the right)."""
    return x + 0.5 * y * abs(y)


def admissible_mask(spec: ProblemSpec, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorised admissibility test; the scalar API delegates here."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if spec.boundary == Boundary.NONE:
        return np.ones(np.broadcast(xs, ys).shape, dtype=bool)
    if spec.boundary == Boundary.HORIZONTAL:
        return ys >= -spec.b - ATOL
    if spec.boundary == Boundary.VERTICAL_RIGHT:
        return xs <= spec.p - 0.5 * np.maximum(ys, 0.0) ** 2 + ATOL
    if spec.boundary == Boundary.VERTICAL_LEFT:
        return xs >= -spec.p + 0.5 * np.minimum(ys, 0.0) ** 2 - ATOL
    k, b = spec.k, spec.b
    if k > 0:
        feasible = ys - k * xs + b >= -ATOL
        c = xs + 0.5 * ys**2
        lens = (ys >= -ATOL) & (c >= b / k - ATOL)
        return feasible & ~lens
    q = -k
    feasible = ys + q * xs + b >= -ATOL
    pts = characteristic_points(spec)
    c_plus = pts.m
    pocket = (ys < pts.C.y - ATOL) & (xs < c_plus + 0.5 * ys**2 - ATOL)
    return feasible & ~pocket


def is_admissible_start(spec: ProblemSpec, s: State) -> bool:
    """True iff some admissible trajectory from ``s`` reaches the origin."""
    return bool(admissible_mask(spec, np.array([s.x]), np.array([s.y]))[0])


def classify_region(spec: ProblemSpec, s: State) -> Region:
    """Deterministic region label of ``s`` for the regime of ``spec``."""
    regime = classify_regime(spec)
    x, y = s.x, s.y

    if regime == Regime.UNCONSTRAINED:
        if abs(x) <= ATOL and abs(y) <= ATOL:
            return Region.ORIGIN
        d = s_side(x, y)
        if d < -ATOL:
            return Region.LEFT_OF_S
        if d > ATOL:
            return Region.RIGHT_OF_S
        return Region.LEFT_OF_S if y >= 0 else Region.RIGHT_OF_S

    if regime == Regime.HORIZONTAL:
        b = spec.b
        if y < -b - ATOL:
            return Region.FORBIDDEN
        if abs(y + b) <= ATOL:
            return Region.ON_GAMMA if x >= 0.5 * b * b - ATOL else Region.LEFT_OF_S
        d = s_side(x, y)
        if d < -ATOL:
            return Region.LEFT_OF_S
        if d > ATOL:
            return Region.RIGHT_OF_S
        return Region.LEFT_OF_S if y >= 0 else Region.RIGHT_OF_S

    if regime in (Regime.VERTICAL_RIGHT, Regime.VERTICAL_LEFT):
        return Region.ADMISSIBLE if is_admissible_start(spec, s) else Region.FORBIDDEN

    pts = characteristic_points(spec)
    k, b = spec.k, spec.b

    if k > 0:
        resid = y - k * x + b
        if resid < -ATOL:
            return Region.FORBIDDEN
        c = x + 0.5 * y * y
        c_ee = b / k
        if y >= -ATOL and c >= c_ee - ATOL:
            if abs(c - c_ee) <= ATOL:
                return Region.BOUNDARY_PARABOLA_EE
            return Region.FORBIDDEN
        free_label, band_label, seg_label = {
            Regime.POS_C_ABOVE_A: (Region.OMEGA1, Region.OMEGA2_INTERIOR, Region.SEGMENT_CE),
            Regime.POS_C_EQUALS_A: (Region.W1, Region.W2_INTERIOR, Region.SEGMENT_CE),
            Regime.POS_C_BELOW_A: (Region.Q1, Region.Q2_INTERIOR, Region.SEGMENT_AE),
        }[regime]
        # slide exits at C when C is at or above A, otherwise at A
        exit_y = pts.C.y if regime != Regime.POS_C_BELOW_A else pts.A.y
        if abs(resid) <= ATOL:
            if exit_y + ATOL < y < 0.0:
                return seg_label
            return free_label
        c_inner = pts.rays[0].c  # tangent parabola (C>A, C=A) or the one through A
        if y > pts.C.y and c_inner + ATOL < c < c_ee - ATOL:
            return band_label
        return free_label

    q = -k
    resid = y + q * x + b
    if resid < -ATOL:
        return Region.FORBIDDEN
    c_plus = pts.m
    x_cut = c_plus + 0.5 * y * y
    if y < pts.C.y - ATOL and x < x_cut - ATOL:
        return Region.FORBIDDEN

    if regime == Regime.NEG_THREE:
        if abs(resid) <= ATOL and pts.C.y - ATOL <= y <= pts.F.y + ATOL:
            return Region.OMEGA3
        if y <= pts.C.y + ATOL and abs(x - x_cut) <= ATOL:
            return Region.PARABOLA_CC2
        d = s_side(x, y)
        if d < -ATOL or (abs(d) <= ATOL and y >= 0):
            return Region.OMEGA1
        c = x + 0.5 * y * y
        c_f = pts.ray("FF'").c
        c_minus = pts.ray("CC'").c
        if c <= c_f + ATOL:
            return Region.OMEGA2
        if c <= c_minus + ATOL:
            return Region.OMEGA3
        return Region.OMEGA4

    if regime == Regime.NEG_TWO:
        d = s_side(x, y)
        if d < -ATOL or (abs(d) <= ATOL and y >= 0):
            return Region.W1
        c = x + 0.5 * y * y
        if c <= pts.ray("CC'").c + ATOL:
            return Region.W2
        return Region.W3

    # one crossing
    d = s_side(x, y)
    if d < -ATOL or (abs(d) <= ATOL and y >= 0):
        return Region.Q1
    return Region.Q2


def default_window(spec: ProblemSpec) -> tuple[float, float, float, float]:
    """Plotting window: 1.5x the bounding box of the characteristic points and
    the origin (regions are unbounded, so some window is always needed)."""
    pts = characteristic_points(spec)
    xs = [0.0]
    ys = [0.0]
    for pt in (pts.A, pts.B, pts.C, pts.E, pts.F, pts.C_star):
        if pt is not None:
            xs.append(pt.x)
            ys.append(pt.y)
    if spec.boundary == Boundary.HORIZONTAL:
        ys.append(-spec.b)
    lo_x, hi_x = min(xs), max(xs)
    lo_y, hi_y = min(ys), max(ys)
    cx, cy = 0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y)
    half_x = max(0.75 * (hi_x - lo_x), 1.0)
    half_y = max(0.75 * (hi_y - lo_y), 1.0)
    return (cx - half_x, cx + half_x, cy - half_y, cy + half_y)
