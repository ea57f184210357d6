"""Independent numeric ground truth for the closed-form synthesis.

Two unrelated estimators of the minimum time are provided:

* ``dp_solve`` — a semi-Lagrangian front propagation for the minimum-time
  target problem on a rectangular grid.  A level function, initialised to
  ``|s| - r_target`` and to a large positive value on inadmissible nodes, is
  swept backward in time: each step applies
  ``L(s) <- min(L(s), min_u L(flow_u(s, dt)))`` with bilinear interpolation,
  where ``flow_u`` is the exact constant-control flow over one step and a
  candidate is discarded when the swept arc leaves the feasible set (its
  constraint slack along the step is a closed-form quadratic) or its stencil
  touches an inadmissible or out-of-window node (over-approximating the
  forbidden set by at most one cell).  A node's arrival time is recorded,
  with a sub-step linear correction, when its level value first crosses
  zero.  Iterating the stationary one-step value recursion directly would
  interpolate the arrival-time function itself, which has square-root kinks
  along the switching curve; measured errors of that variant exceed its own
  tolerance budget several-fold, while the level function stays Lipschitz
  and the front position converges cleanly.  Updates are synchronous and
  monotone, so the result is deterministic for a fixed grid no matter how
  many worker threads evaluate the control candidates.

* ``structure_search`` — brute force over candidate mode sequences of the
  form [<= 2 bang approach] [optional boundary slide] [<= 2 bang tail], with
  feasibility enforced exactly (the constraint slack along a bang arc is a
  quadratic, so its minimum is closed-form).  Free slide endpoints are tuned
  by bracketed golden-section minimisation (parameter tolerance 1e-10),
  nested at most twice.

``compare`` runs both against the planner on a batch of starts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NoFeasibleStructure, NonConvergence
from .problem import Boundary, ProblemSpec, State, characteristic_points, gamma_x
from .regions import admissible_mask, default_window, is_admissible_start
from . import synthesis

#: level value marking inadmissible / unusable nodes
BIG = 1e6
GOLDEN_TOL = 1e-10
FEAS_TOL = 1e-9


# ---------------------------------------------------------------------------
# grid value iteration


@dataclass(frozen=True)
class GridSpec:
    """Discretisation of the minimum-time dynamic program."""

    window: tuple[float, float, float, float]
    nx: int = 201
    ny: int = 201
    controls: tuple[float, ...] = (-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0)
    dt: Optional[float] = None
    max_iters: Optional[int] = None
    tol_sup: float = 1e-9
    r_target: float = 2e-2
    threads: int = 0  # 0 = auto (serial)

    def __post_init__(self):
        x_lo, x_hi, y_lo, y_hi = self.window
        if not (x_lo < 0.0 < x_hi and y_lo < 0.0 < y_hi):
            raise ValueError("window must contain the origin")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if -1.0 not in self.controls or 1.0 not in self.controls:
            raise ValueError("control samples must include -1 and +1")

    @property
    def hx(self) -> float:
        return (self.window[1] - self.window[0]) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.window[3] - self.window[2]) / (self.ny - 1)

    def step(self) -> float:
        # a step of a few cells keeps the number of interpolation
        # applications (and hence accumulated smoothing) low; the scheme is
        # unconditionally stable in dt
        if self.dt is not None:
            return self.dt
        return 4.0 * min(self.hx, self.hy)

    def effective_r_target(self) -> float:
        """Target radius actually used: the requested one, or 1.5 cells if
        that is larger (a sub-cell ball cannot seed the front)."""
        return max(self.r_target, 1.5 * max(self.hx, self.hy))

    def cell_budget(self) -> float:
        """Time worth of 3 grid cells plus the (effective) target radius."""
        return self.effective_r_target() + 3.0 * max(self.hx, self.hy)


@dataclass
class ValueField:
    """Approximate minimal time on the grid; +inf marks states that are
    inadmissible or unreached within the window and horizon."""

    spec: ProblemSpec
    grid: GridSpec
    values: np.ndarray  # (ny, nx), np.inf where unreachable/forbidden
    iterations: int
    sup_change: float

    def at(self, x: float, y: float) -> float:
        """Bilinear value at a point, renormalising over finite corners so
        that states next to the bound (one-cell smear) stay queryable."""
        g = self.grid
        x_lo, x_hi, y_lo, y_hi = g.window
        if not (x_lo <= x <= x_hi and y_lo <= y <= y_hi):
            return math.inf
        fx = (x - x_lo) / g.hx
        fy = (y - y_lo) / g.hy
        ix = min(int(fx), g.nx - 2)
        iy = min(int(fy), g.ny - 2)
        wx = fx - ix
        wy = fy - iy
        q = self.values[iy:iy + 2, ix:ix + 2]
        w = np.array([[(1 - wx) * (1 - wy), wx * (1 - wy)],
                      [(1 - wx) * wy, wx * wy]])
        finite = np.isfinite(q)
        wsum = float(np.sum(w[finite]))
        if not finite.any() or wsum < 1e-9:
            return math.inf
        return float(np.sum(w[finite] * q[finite]) / wsum)


def _sweep_slack_min(spec: ProblemSpec, xs, ys, u: float, dt: float):
    """Minimum constraint slack along the exact constant-u step (quadratic)."""
    if spec.boundary == Boundary.NONE:
        return np.full(xs.shape, np.inf)
    if spec.boundary == Boundary.SLOPED:
        r0 = ys - spec.k * xs + spec.b
        r1 = u - spec.k * ys
        r2 = -0.5 * spec.k * u
    elif spec.boundary == Boundary.HORIZONTAL:
        r0, r1, r2 = ys + spec.b, np.full(xs.shape, u), 0.0
    elif spec.boundary == Boundary.VERTICAL_RIGHT:
        r0, r1, r2 = spec.p - xs, -ys, -0.5 * u
    else:
        r0, r1, r2 = xs + spec.p, ys, 0.5 * u
    out = np.minimum(r0, r0 + r1 * dt + r2 * dt * dt)
    if r2 != 0.0:
        tv = -r1 / (2.0 * r2)
        interior = (tv > 0.0) & (tv < dt)
        out = np.where(interior, np.minimum(out, r0 + r1 * tv + r2 * tv * tv), out)
    return out


def _interp_tables(spec: ProblemSpec, grid: GridSpec, xs, ys, dt):
    """Bilinear gather tables for every (cell, control).

    Successors follow the exact constant-control flow over one step (the
    dynamics are linear, so the flow is closed-form).  A candidate move is
    invalid when the swept arc leaves the window or its constraint slack
    goes negative mid-step (which would let long steps tunnel across thin
    forbidden slivers near the tangency point).
    """
    x_lo, x_hi, y_lo, y_hi = grid.window
    nx, ny = grid.nx, grid.ny
    tabs = []
    for u in grid.controls:
        px = xs + dt * ys + 0.5 * u * dt * dt
        py = ys + dt * u
        ok = (px >= x_lo) & (px <= x_hi) & (py >= y_lo) & (py <= y_hi)
        ok &= _sweep_slack_min(spec, xs, ys, u, dt) >= -FEAS_TOL
        fx = np.clip((px - x_lo) / grid.hx, 0.0, nx - 1 - 1e-12)
        fy = np.clip((py - y_lo) / grid.hy, 0.0, ny - 1 - 1e-12)
        ix = fx.astype(np.int64)
        iy = fy.astype(np.int64)
        wx = fx - ix
        wy = fy - iy
        base = iy * nx + ix
        tabs.append((ok.ravel(), base.ravel(), wx.ravel(), wy.ravel()))
    return tabs


def _sweep_control(vflat, tab, nx):
    inside, base, wx, wy = tab
    v00 = vflat[base]
    v01 = vflat[base + 1]
    v10 = vflat[base + nx]
    v11 = vflat[base + nx + 1]
    cut = 0.5 * BIG
    bad = (~inside) | (v00 >= cut) | (v01 >= cut) | (v10 >= cut) | (v11 >= cut)
    out = ((1 - wy) * ((1 - wx) * v00 + wx * v01)
           + wy * ((1 - wx) * v10 + wx * v11))
    out[bad] = BIG
    return out


def dp_solve(spec: ProblemSpec, grid: GridSpec) -> ValueField:
    """Backward front propagation for the minimum time to the origin."""
    x_lo, x_hi, y_lo, y_hi = grid.window
    xs1 = np.linspace(x_lo, x_hi, grid.nx)
    ys1 = np.linspace(y_lo, y_hi, grid.ny)
    xs, ys = np.meshgrid(xs1, ys1)
    dt = grid.step()

    admissible = admissible_mask(spec, xs, ys)
    level = np.hypot(xs, ys) - grid.effective_r_target()
    level[~admissible] = BIG
    arrival = np.where((level <= 0.0) & admissible, 0.0, np.inf)

    tabs = _interp_tables(spec, grid, xs, ys, dt)
    threads = grid.threads
    if threads == 0:
        env = os.environ.get("TOC_SYNTH_THREADS", "0")
        try:
            threads = int(env)
        except ValueError:
            threads = 0

    max_iters = grid.max_iters
    if max_iters is None:
        span = (x_hi - x_lo) + (y_hi - y_lo)
        max_iters = int((6.0 * span + 30.0) / dt)
    patience = max(10, int(2.0 / dt))

    sup = math.inf
    it = 0
    since_arrival = 0
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for it in range(1, max_iters + 1):
            lflat = level.ravel()
            if pool is not None:
                cands = list(pool.map(
                    lambda tab: _sweep_control(lflat, tab, grid.nx), tabs))
            else:
                cands = [_sweep_control(lflat, tab, grid.nx) for tab in tabs]
            best = cands[0]
            for c in cands[1:]:  # fixed reduction order over control index
                best = np.minimum(best, c)
            # freeze crossed cells: only the zero crossing matters, and a
            # static negative side keeps the front gradient well scaled
            new_level = np.where(level <= 0.0, level,
                                 np.minimum(level, best.reshape(level.shape)))
            new_level[~admissible] = BIG
            newly = (new_level <= 0.0) & np.isinf(arrival) & admissible
            if np.any(newly):
                drop = level[newly] - new_level[newly]
                frac = np.where(drop > 1e-30,
                                level[newly] / np.maximum(drop, 1e-30), 1.0)
                arrival[newly] = (it - 1) * dt + np.clip(frac, 0.0, 1.0) * dt
                since_arrival = 0
            else:
                since_arrival += 1
            moving = level < 0.5 * BIG
            sup = float(np.max(np.abs(np.where(moving, level - new_level, 0.0))))
            level = new_level
            if sup < grid.tol_sup or since_arrival >= patience:
                break
        else:
            field = ValueField(spec, grid, arrival, it, sup)
            if since_arrival < patience:
                raise NonConvergence(
                    f"front still moving after {it} steps (sup {sup:g})", field)
    finally:
        if pool is not None:
            pool.shutdown()
    return ValueField(spec, grid, arrival, it, sup)


# ---------------------------------------------------------------------------
# structure search


def golden_min(f, lo: float, hi: float, tol: float = GOLDEN_TOL,
               prescan: int = 33) -> tuple[float, float]:
    """Bracketed golden-section minimisation tracking the best seen value."""
    if hi <= lo:
        return lo, f(lo)
    xs = np.linspace(lo, hi, prescan)
    vals = [f(x) for x in xs]
    i = int(np.argmin(vals))
    best_x, best_v = xs[i], vals[i]
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, prescan - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        for x, v in ((c, fc), (d, fd)):
            if v < best_v:
                best_x, best_v = x, v
    return best_x, best_v


def _bang_min_slack(spec: ProblemSpec, x0, y0, u, dur) -> float:
    """Exact minimum of the constraint slack along a bang arc."""
    if spec.boundary == Boundary.NONE:
        return math.inf
    if spec.boundary == Boundary.SLOPED:
        r0 = y0 - spec.k * x0 + spec.b
        r1 = u - spec.k * y0
        r2 = -0.5 * spec.k * u
    elif spec.boundary == Boundary.HORIZONTAL:
        r0, r1, r2 = y0 + spec.b, u, 0.0
    elif spec.boundary == Boundary.VERTICAL_RIGHT:
        r0, r1, r2 = spec.p - x0, -y0, -0.5 * u
    else:
        r0, r1, r2 = x0 + spec.p, y0, 0.5 * u
    best = min(r0, r0 + r1 * dur + r2 * dur * dur)
    if r2 != 0.0:
        tv = -r1 / (2.0 * r2)
        if 0.0 < tv < dur:
            best = min(best, r0 + r1 * tv + r2 * tv * tv)
    return best


def _bang_steps(x0, y0, u, y1):
    dur = (y1 - y0) / u
    x1 = x0 + (y1 * y1 - y0 * y0) / (2.0 * u)
    return dur, x1


def _two_bang_time(spec: ProblemSpec, s: tuple[float, float],
                   t: tuple[float, float]) -> float:
    """Fastest feasible <=2-bang connection from state ``s`` to state ``t``."""
    x0, y0 = s
    x1, y1 = t
    best = math.inf
    # single arc: target on the same bang parabola
    for u in (-1.0, 1.0):
        if (y1 - y0) * u < 0.0:
            continue
        dur, xe = _bang_steps(x0, y0, u, y1)
        if abs(xe - x1) <= 1e-10 * (1.0 + abs(x1)):
            if _bang_min_slack(spec, x0, y0, u, dur) >= -FEAS_TOL:
                best = min(best, dur)
    # (-1, +1): meet below both endpoints
    m2 = x0 - x1 + 0.5 * (y0 * y0 + y1 * y1)
    if m2 > 0.0:
        ym = -math.sqrt(m2)
        if ym <= min(y0, y1) + 1e-12:
            d1 = y0 - ym
            d2 = y1 - ym
            xm = x0 + (ym * ym - y0 * y0) / -2.0
            if (_bang_min_slack(spec, x0, y0, -1.0, d1) >= -FEAS_TOL
                    and _bang_min_slack(spec, xm, ym, 1.0, d2) >= -FEAS_TOL):
                best = min(best, d1 + d2)
    # (+1, -1): meet above both endpoints
    m2 = x1 - x0 + 0.5 * (y0 * y0 + y1 * y1)
    if m2 > 0.0:
        ym = math.sqrt(m2)
        if ym >= max(y0, y1) - 1e-12:
            d1 = ym - y0
            d2 = ym - y1
            xm = x0 + (ym * ym - y0 * y0) / 2.0
            if (_bang_min_slack(spec, x0, y0, 1.0, d1) >= -FEAS_TOL
                    and _bang_min_slack(spec, xm, ym, -1.0, d2) >= -FEAS_TOL):
                best = min(best, d1 + d2)
    if abs(x1 - x0) <= 1e-12 and abs(y1 - y0) <= 1e-12:
        best = min(best, 0.0)
    return best


def _tail_time(spec: ProblemSpec, s: tuple[float, float]) -> float:
    """Fastest feasible <=2-bang arrival at the origin from ``s``."""
    return _two_bang_time(spec, s, (0.0, 0.0))


def _slide_params(spec: ProblemSpec, start: State):
    """(lo, hi, entry_state, slide_time) helpers for the slide coordinate."""
    if spec.boundary == Boundary.HORIZONTAL:
        b = spec.b
        lo = 0.5 * b * b
        hi = max(lo + 1e-9, start.x + 0.5 * start.y * start.y + 1.0)
        entry = lambda sx: (sx, -b)
        slide_time = lambda s_in, s_out: (s_in - s_out) / b
        forward = lambda s_in: (lo, s_in)  # exits move left
        return lo, hi, entry, slide_time, forward
    k = spec.k
    pts = characteristic_points(spec)
    if k > 0:
        lo, hi = pts.C.y, -1e-12
        entry = lambda yy: (gamma_x(spec, yy), yy)
        slide_time = lambda a, b2: math.log(b2 / a) / k
        forward = lambda y_in: (lo, y_in)  # slides run downward
        return lo, hi, entry, slide_time, forward
    if pts.F is None:
        return None  # tangent contact only; no slide segment
    lo, hi = pts.C.y, pts.F.y
    entry = lambda yy: (gamma_x(spec, yy), yy)
    slide_time = lambda a, b2: math.log(b2 / a) / k
    forward = lambda y_in: (y_in, hi)  # slides run upward
    return lo, hi, entry, slide_time, forward


def structure_search(spec: ProblemSpec, start: State) -> float:
    """Best time over bang/slide candidate structures (independent oracle)."""
    s0 = (start.x, start.y)
    best = _tail_time(spec, s0)

    params = None
    if spec.boundary in (Boundary.SLOPED, Boundary.HORIZONTAL):
        params = _slide_params(spec, start)
    if params is not None:
        lo, hi, entry, slide_time, forward = params
        if hi > lo:
            def with_entry(sigma_in: float) -> float:
                e_state = entry(sigma_in)
                t_in = _two_bang_time(spec, s0, e_state)
                if not math.isfinite(t_in):
                    return math.inf
                out_lo, out_hi = forward(sigma_in)

                def with_exit(sigma_out: float) -> float:
                    t_slide = slide_time(sigma_in, sigma_out)
                    if t_slide < -1e-12:
                        return math.inf
                    t_tail = _tail_time(spec, entry(sigma_out))
                    return t_in + max(t_slide, 0.0) + t_tail

                if out_hi <= out_lo:
                    return with_exit(sigma_in)
                _, v = golden_min(with_exit, out_lo, out_hi)
                return v

            _, v = golden_min(with_entry, lo, hi)
            best = min(best, v)
            # single-bang entries hit the bound at one exact point; golden
            # sampling misses them, so evaluate those entries explicitly
            c0 = start.x + 0.5 * start.y * start.y
            specials = []
            if spec.boundary == Boundary.HORIZONTAL:
                specials.append(c0 - 0.5 * spec.b * spec.b)
            elif spec.k > 0:
                disc = 1.0 / spec.k**2 + 2.0 * c0 - 2.0 * spec.b / spec.k
                if disc >= 0.0:
                    specials.append(-1.0 / spec.k + math.sqrt(disc))
            else:
                q = -spec.k
                disc = 1.0 / q**2 + 2.0 * c0 + 2.0 * spec.b / q
                if disc >= 0.0:
                    specials.append(1.0 / q - math.sqrt(disc))
            for sigma in specials:
                if lo <= sigma <= hi:
                    best = min(best, with_entry(sigma))

    if not math.isfinite(best):
        raise NoFeasibleStructure(f"no feasible candidate structure from {start}")
    return best


# ---------------------------------------------------------------------------
# batch comparison


@dataclass
class CompareRow:
    start: State
    synthesis_value: float
    search_value: float
    dp_value: float
    search_gap: float
    dp_gap: float
    passed: bool


@dataclass
class CompareReport:
    rows: list[CompareRow] = field(default_factory=list)
    search_tol: float = 0.0
    dp_budget: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def compare(spec: ProblemSpec, starts: Sequence[State], grid: Optional[GridSpec],
            search_rtol: float = 1e-7) -> CompareReport:
    """Per-start agreement of the planner, the structure search, and the DP."""
    fieldv = dp_solve(spec, grid) if grid is not None else None
    budget = grid.cell_budget() if grid is not None else math.inf
    report = CompareReport(search_tol=search_rtol, dp_budget=budget)
    for s in starts:
        t_synth = synthesis.value(spec, s)
        t_search = structure_search(spec, s)
        t_dp = fieldv.at(s.x, s.y) if fieldv is not None else math.nan
        gap_s = abs(t_synth - t_search)
        gap_d = abs(t_synth - t_dp) if fieldv is not None else 0.0
        ok = gap_s <= search_rtol * (1.0 + t_synth)
        if fieldv is not None:
            ok = ok and math.isfinite(t_dp) and gap_d <= budget
        report.rows.append(CompareRow(s, t_synth, t_search, t_dp, gap_s, gap_d, ok))
    return report


def halton(index: int, base: int) -> float:
    """Radical-inverse (Halton) sequence member in (0, 1)."""
    result = 0.0
    f = 1.0
    i = index
    while i > 0:
        f /= base
        result += f * (i % base)
        i //= base
    return result


def sample_admissible_starts(spec: ProblemSpec, n: int,
                             window: Optional[tuple[float, float, float, float]] = None,
                             seed: int = 0, margin: float = 0.15,
                             require_plan_in_window: bool = True,
                             min_value: float = 0.0,
                             lipschitz_cap: Optional[float] = None,
                             probe_eps: float = 0.05) -> list[State]:
    """Halton-sampled admissible starts inside a shrunken window.

    Optional filters restrict to starts where a grid oracle is meaningful:

    * ``require_plan_in_window`` keeps only starts whose optimal trajectory
      stays inside the full window (otherwise grid values are rightly +inf);
    * ``min_value`` drops very short trajectories, whose grid values are
      dominated by target-ball corner cutting;
    * ``lipschitz_cap`` drops starts where the value changes faster than the
      cap per unit state over ``probe_eps`` probes -- near the blow-up strip
      the value gradient exceeds 1/cell and no practical grid represents it.
    """
    if window is None:
        window = default_window(spec)
    x_lo, x_hi, y_lo, y_hi = window
    mx = margin * (x_hi - x_lo)
    my = margin * (y_hi - y_lo)
    out: list[State] = []
    idx = 1 + 997 * seed
    attempts = 0
    while len(out) < n and attempts < 100000:
        attempts += 1
        x = x_lo + mx + halton(idx, 2) * (x_hi - x_lo - 2 * mx)
        y = y_lo + my + halton(idx, 3) * (y_hi - y_lo - 2 * my)
        idx += 1
        s = State(x, y)
        if not is_admissible_start(spec, s):
            continue
        plan = synthesis.solve(spec, s)
        if plan.total_time < min_value:
            continue
        if require_plan_in_window:
            path = [plan.state_at(t) for t in
                    np.linspace(0.0, plan.total_time, 64)]
            if not all(x_lo <= q.x <= x_hi and y_lo <= q.y <= y_hi for q in path):
                continue
        if lipschitz_cap is not None and _local_value_rate(
                spec, s, probe_eps) > lipschitz_cap:
            continue
        out.append(s)
    return out


def _local_value_rate(spec: ProblemSpec, s: State, eps: float) -> float:
    """Worst |dV| per unit state over small axis probes around ``s``."""
    v0 = synthesis.value(spec, s)
    worst = 0.0
    for dx, dy in ((eps, 0.0), (-eps, 0.0), (0.0, eps), (0.0, -eps)):
        probe = State(s.x + dx, s.y + dy)
        if not is_admissible_start(spec, probe):
            return math.inf
        worst = max(worst, abs(synthesis.value(spec, probe) - v0) / eps)
    return worst
