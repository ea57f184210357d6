"""Optimal arc sequences and the minimum-time feedback law.

``solve`` maps an admissible start to its unique optimal plan, dispatching on
the region label:

* free-synthesis regions: one or two bang arcs of the unconstrained problem;
* positive slope, C above A: bang down to the bound, slide to ``C``, bang to
  ``B``, bang to the origin;
* positive slope, C at/below A: bang down, slide to ``C`` (resp. ``A``), bang
  to the origin;
* negative slope, three crossings: from the inner band, bang down to the
  bound and slide up to ``F``; from the far band, bang down to the cut
  parabola, ride it up to ``C``, slide to ``F``, bang to the origin;
* horizontal: bang down to ``y = -b``, rest-slide left to ``A``, bang up;
* vertical limits: the free synthesis clipped to the admissible set.

All switch points are closed-form intersections of the current-mode curve
with the regime's target curves; nothing is integrated numerically.
Zero-length arcs are dropped, so plans are canonical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .errors import InadmissibleStart, NotOptimalPlan
from .problem import (
    Boundary,
    ProblemSpec,
    Regime,
    State,
    characteristic_points,
    classify_regime,
    gamma_x,
)
from .regions import ATOL, Region, classify_region, is_admissible_start, s_side
from .trajectory import (
    ArcPlan,
    ControlMode,
    ZERO_DURATION,
    arc_control,
    arc_state,
    bang_arc,
    slide_arc,
)

ORIGIN_ATOL = 1e-12


@dataclass(frozen=True)
class SynthesisPlan:
    """Ordered optimal arcs; chains continuously and ends at the origin."""

    spec: ProblemSpec
    start: State
    region: Region
    arcs: tuple[ArcPlan, ...]
    total_time: float

    @cached_property
    def switch_times(self) -> tuple[float, ...]:
        ts = [0.0]
        for arc in self.arcs:
            ts.append(ts[-1] + arc.duration)
        return tuple(ts)

    def _locate(self, t: float) -> tuple[int, float]:
        ts = self.switch_times
        t = min(max(t, 0.0), self.total_time)
        for i, arc in enumerate(self.arcs):
            if t <= ts[i + 1] or i == len(self.arcs) - 1:
                return i, t - ts[i]
        return len(self.arcs) - 1, self.arcs[-1].duration

    def state_at(self, t: float) -> State:
        if not self.arcs:
            return State(0.0, 0.0)
        i, tau = self._locate(t)
        return arc_state(self.spec, self.arcs[i], tau)

    def control_at(self, t: float) -> float:
        if not self.arcs:
            return 0.0
        ts = self.switch_times
        t = min(max(t, 0.0), self.total_time)
        # controls are right-continuous at junctions except at the final time
        for i in range(len(self.arcs)):
            if t < ts[i + 1] or i == len(self.arcs) - 1:
                return arc_control(self.spec, self.arcs[i], t - ts[i])
        raise AssertionError("unreachable")


def _assemble(spec, start, region, arcs) -> SynthesisPlan:
    kept = tuple(a for a in arcs if a.duration > ZERO_DURATION)
    for left, right in zip(kept, kept[1:]):
        if left.mode == right.mode:
            raise NotOptimalPlan(f"adjacent arcs share mode {left.mode}")
        gap = math.hypot(left.end.x - right.start.x, left.end.y - right.start.y)
        if gap > 1e-8:
            raise NotOptimalPlan(f"arc chain is discontinuous by {gap:g}")
    total = sum(a.duration for a in kept)
    return SynthesisPlan(spec, start, region, kept, total)


def _free_arcs(spec: ProblemSpec, s: State) -> list[ArcPlan]:
    """Unconstrained minimum-time arcs to the origin (Feldbaum solution)."""
    if abs(s.x) <= ORIGIN_ATOL and abs(s.y) <= ORIGIN_ATOL:
        return []
    d = s_side(s.x, s.y)
    if abs(d) <= ATOL:
        return [bang_arc(s, 1.0 if s.y < 0 else -1.0, 0.0)]
    if d > 0:
        y_m = -math.sqrt(s.x + 0.5 * s.y * s.y)
        first = bang_arc(s, -1.0, y_m)
        return [first, bang_arc(first.end, 1.0, 0.0)]
    y_m = math.sqrt(0.5 * s.y * s.y - s.x)
    first = bang_arc(s, 1.0, y_m)
    return [first, bang_arc(first.end, -1.0, 0.0)]


def _descend_to_gamma(spec: ProblemSpec, s: State) -> tuple[list[ArcPlan], State]:
    """Bang-down arc to the first crossing of the bound line (k > 0)."""
    k, b = spec.k, spec.b
    c = s.x + 0.5 * s.y * s.y
    disc = 1.0 / (k * k) + 2.0 * c - 2.0 * b / k
    y_n = -1.0 / k + math.sqrt(max(disc, 0.0))
    arc = bang_arc(s, -1.0, min(y_n, s.y))
    return [arc], arc.end if arc.duration > ZERO_DURATION else s


def solve(spec: ProblemSpec, start: State) -> SynthesisPlan:
    """Optimal arc sequence from an admissible start to the origin."""
    if not is_admissible_start(spec, start):
        raise InadmissibleStart(f"no admissible trajectory from {start}")
    region = classify_region(spec, start)
    if abs(start.x) <= ORIGIN_ATOL and abs(start.y) <= ORIGIN_ATOL:
        return _assemble(spec, start, region, ())
    pts = characteristic_points(spec)
    regime = classify_regime(spec)

    free_regions = (Region.OMEGA1, Region.W1, Region.Q1, Region.OMEGA2,
                    Region.W2, Region.W3, Region.Q2, Region.LEFT_OF_S,
                    Region.ADMISSIBLE, Region.ORIGIN)

    if spec.boundary == Boundary.NONE or region in free_regions:
        return _assemble(spec, start, region, _free_arcs(spec, start))

    if regime == Regime.HORIZONTAL:
        b = spec.b
        x_a = 0.5 * b * b
        if region == Region.ON_GAMMA:
            arcs = [slide_arc(spec, start, x_a)]
            arcs.append(bang_arc(arcs[-1].end if arcs[-1].duration > ZERO_DURATION
                                 else start, 1.0, 0.0))
            return _assemble(spec, start, region, arcs)
        # right of the switching curve: free unless the swing dips below the bound
        c = start.x + 0.5 * start.y * start.y
        if c <= b * b + ATOL:
            return _assemble(spec, start, region, _free_arcs(spec, start))
        down = bang_arc(start, -1.0, -b)
        rest = slide_arc(spec, down.end, x_a)
        up = bang_arc(rest.end, 1.0, 0.0)
        return _assemble(spec, start, region, [down, rest, up])

    if regime in (Regime.POS_C_ABOVE_A, Regime.POS_C_EQUALS_A, Regime.POS_C_BELOW_A):
        exit_y = pts.C.y if regime != Regime.POS_C_BELOW_A else pts.A.y
        if region in (Region.SEGMENT_CE, Region.SEGMENT_AE):
            arcs = []
            entry = start
        else:  # interior band: bang down to the bound first
            lead, entry = _descend_to_gamma(spec, start)
            arcs = lead
        if entry.y > exit_y + ZERO_DURATION:
            arcs.append(slide_arc(spec, entry, exit_y))
            exit_state = arcs[-1].end
        else:
            exit_state = entry
        if regime == Regime.POS_C_ABOVE_A:
            to_b = bang_arc(exit_state, -1.0, pts.B.y)
            arcs.extend([to_b, bang_arc(to_b.end, 1.0, 0.0)])
        else:
            arcs.append(bang_arc(exit_state, 1.0, 0.0))
        return _assemble(spec, start, region, arcs)

    if regime == Regime.NEG_THREE:
        q = spec.q
        if region == Region.OMEGA3:
            c = start.x + 0.5 * start.y * start.y
            disc = 1.0 / (q * q) + 2.0 * c + 2.0 * spec.b / q
            y_n = 1.0 / q - math.sqrt(disc)
            arcs = [bang_arc(start, -1.0, min(y_n, start.y))]
            entry = arcs[0].end if arcs[0].duration > ZERO_DURATION else start
        elif region == Region.OMEGA4:
            c_plus = pts.m
            c = start.x + 0.5 * start.y * start.y
            y_p = -math.sqrt(c - c_plus)
            arcs = [bang_arc(start, -1.0, y_p)]
            ride = bang_arc(arcs[0].end, 1.0, pts.C.y)
            arcs.append(ride)
            entry = ride.end
        elif region == Region.PARABOLA_CC2:
            arcs = [bang_arc(start, 1.0, pts.C.y)]
            entry = arcs[0].end if arcs[0].duration > ZERO_DURATION else start
        else:  # pragma: no cover
            raise NotOptimalPlan(f"unhandled region {region} for {regime}")
        if entry.y < pts.F.y - ZERO_DURATION:
            arcs.append(slide_arc(spec, entry, pts.F.y))
            exit_state = arcs[-1].end
        else:
            exit_state = entry
        arcs.append(bang_arc(exit_state, 1.0, 0.0))
        return _assemble(spec, start, region, arcs)

    raise NotOptimalPlan(f"no construction for region {region} in regime {regime}")


def feedback(spec: ProblemSpec, s: State) -> float:
    """Value of the optimal feedback law at ``s`` (first arc of ``solve``)."""
    plan = solve(spec, s)
    if not plan.arcs:
        return 0.0
    return arc_control(spec, plan.arcs[0], 0.0)


def value(spec: ProblemSpec, start: State) -> float:
    """Minimum time to the origin from an admissible start."""
    return solve(spec, start).total_time


def mirror_spec(spec: ProblemSpec) -> ProblemSpec:
    """Image of the constraint family under ``(x, y, u) -> (-x, -y, -u)``.

    The vertical bounds swap and the unconstrained problem is fixed; the
    reflected sloped/horizontal families (``y <= k*x + b``) are solved *via*
    the map, not as separate spec variants.
    """
    if spec.boundary == Boundary.VERTICAL_RIGHT:
        return ProblemSpec.vertical_left(spec.p)
    if spec.boundary == Boundary.VERTICAL_LEFT:
        return ProblemSpec.vertical_right(spec.p)
    if spec.boundary == Boundary.NONE:
        return spec
    raise ValueError("sloped/horizontal bounds reflect outside the spec family")


def mirror_plan(plan: SynthesisPlan) -> list[ArcPlan]:
    """Arc-by-arc image of a plan under the central symmetry."""
    flip = {ControlMode.MINUS: ControlMode.PLUS, ControlMode.PLUS: ControlMode.MINUS,
            ControlMode.SLIDE: ControlMode.SLIDE, ControlMode.REST: ControlMode.REST}
    return [ArcPlan(flip[a.mode], a.start.mirrored(), a.end.mirrored(), a.duration)
            for a in plan.arcs]
