"""Problem data for the planar minimum-time double integrator with a linear state bound.

The plant is ``x' = y``, ``y' = u`` with ``|u| <= 1``, steered to the origin in
minimum time while the state stays inside a half-plane.  The bound comes in
four flavours plus the unconstrained problem:

* sloped:          ``y >= k*x - b`` with ``k != 0`` and ``b > 0``
* horizontal:      ``y >= -b``
* vertical right:  ``x <= p``
* vertical left:   ``x >= -p``

Everything downstream (region tests, arc planning, multiplier certificates)
is driven by a handful of characteristic points of the bound line ``G`` and
the free-problem switching curve ``S`` (the union of ``x = -y^2/2, y >= 0``
and ``x = y^2/2, y <= 0``):

* ``A``  crossing of ``G`` with the lower branch of ``S``   (k > 0)
* ``E``  crossing of ``G`` with the x-axis                  (k > 0)
* ``C``  tangency of ``G`` with a bang parabola; for k > 0 the family
  ``x = -y^2/2 + const`` (so ``y_C = -1/k``), for k < 0 the family
  ``x = +y^2/2 + const`` (so ``y_C = 1/k``)
* ``B``  crossing of the tangent parabola with ``S``         (k > 0)
* ``F``  upper crossing of ``G`` with the lower branch of ``S`` (k < 0)
* ``C*`` mirror image of ``C`` through ``E`` along ``G``     (k > 0)
* ``m``  offset of the tangent parabola

With ``w = sqrt(2*b*k + 1)`` (k > 0) the closed forms are::

    y_A = (1 - w)/k          x_A = ((b*k + 1) - w)/k**2
    E   = (b/k, 0)           y_C = -1/k,  x_C = (k*b - 1)/k**2
    m   = (2*k*b - 1)/(2*k**2)
    x_B = m/2,  y_B = -sqrt(m)

and for k < 0, writing ``q = -k`` and ``w = sqrt(1 - 2*b*q)``::

    x_F = ((1 - b*q) - w)/q**2     y_F = (-1 + w)/q
    y_C = -1/q,  x_C = (1 - b*q)/q**2,  m = (1 - 2*b*q)/(2*q**2)

The geometric regime is decided by exact sign tests on the discriminants
``2*b*k - 3`` (k > 0: is ``C`` above, at, or below ``A``) and ``1 - 2*b*q``
(k < 0: three, two, or one crossing of ``G`` with ``S``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional


class Boundary(str, Enum):
    SLOPED = "sloped"
    HORIZONTAL = "horizontal"
    VERTICAL_RIGHT = "vertical_right"
    VERTICAL_LEFT = "vertical_left"
    NONE = "none"


@dataclass(frozen=True)
class State:
    """A phase-plane point: position ``x`` and velocity ``y``."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"state components must be finite, got ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)

    def mirrored(self) -> "State":
        return State(-self.x, -self.y)


@dataclass(frozen=True)
class ProblemSpec:
    """Constraint family selector.

    Use the factory classmethods; the constructor validates the parameter set
    for the chosen boundary.  A sloped bound with ``k == 0`` is rejected here:
    every sloped-case formula divides by ``k``, so callers must build the
    horizontal variant instead.
    """

    boundary: Boundary
    k: Optional[float] = None
    b: Optional[float] = None
    p: Optional[float] = None

    def __post_init__(self):
        kind = self.boundary
        if kind == Boundary.SLOPED:
            if self.k is None or not math.isfinite(self.k):
                raise ValueError("sloped bound requires a finite slope k")
            if self.k == 0.0:
                raise ValueError("sloped bound with k=0 is rejected; use the horizontal variant")
            if self.b is None or not (self.b > 0.0) or not math.isfinite(self.b):
                raise ValueError("sloped bound requires offset b > 0")
            if self.p is not None:
                raise ValueError("sloped bound takes no parameter p")
        elif kind == Boundary.HORIZONTAL:
            if self.b is None or not (self.b > 0.0) or not math.isfinite(self.b):
                raise ValueError("horizontal bound requires offset b > 0")
            if self.k is not None or self.p is not None:
                raise ValueError("horizontal bound takes only b")
        elif kind in (Boundary.VERTICAL_RIGHT, Boundary.VERTICAL_LEFT):
            if self.p is None or not (self.p > 0.0) or not math.isfinite(self.p):
                raise ValueError("vertical bound requires offset p > 0")
            if self.k is not None or self.b is not None:
                raise ValueError("vertical bound takes only p")
        elif kind == Boundary.NONE:
            if self.k is not None or self.b is not None or self.p is not None:
                raise ValueError("unconstrained problem takes no parameters")
        else:  # pragma: no cover
            raise ValueError(f"unknown boundary kind {kind!r}")

    @classmethod
    def sloped(cls, k: float, b: float) -> "ProblemSpec":
        return cls(Boundary.SLOPED, k=float(k), b=float(b))

    @classmethod
    def horizontal(cls, b: float) -> "ProblemSpec":
        return cls(Boundary.HORIZONTAL, b=float(b))

    @classmethod
    def vertical_right(cls, p: float) -> "ProblemSpec":
        return cls(Boundary.VERTICAL_RIGHT, p=float(p))

    @classmethod
    def vertical_left(cls, p: float) -> "ProblemSpec":
        return cls(Boundary.VERTICAL_LEFT, p=float(p))

    @classmethod
    def unconstrained(cls) -> "ProblemSpec":
        return cls(Boundary.NONE)

    @property
    def q(self) -> float:
        """Positive magnitude of a negative slope (only meaningful for k < 0)."""
        assert self.boundary == Boundary.SLOPED and self.k is not None and self.k < 0
        return -self.k


class Regime(str, Enum):
    UNCONSTRAINED = "unconstrained"
    HORIZONTAL = "horizontal"
    POS_C_ABOVE_A = "positive_slope/c_above_a"
    POS_C_EQUALS_A = "positive_slope/c_equals_a"
    POS_C_BELOW_A = "positive_slope/c_below_a"
    NEG_THREE = "negative_slope/three_intersections"
    NEG_TWO = "negative_slope/two_intersections"
    NEG_ONE = "negative_slope/one_intersection"
    VERTICAL_RIGHT = "vertical_right"
    VERTICAL_LEFT = "vertical_left"


@dataclass(frozen=True)
class ParabolaRay:
    """Half-parabola of a bang family anchored at a named point.

    ``x(y) = c + family * y**2 / 2`` with ``family`` in {-1, +1}; the arc runs
    from ``y_anchor`` toward ``+inf`` (direction +1) or ``-inf`` (direction -1).
    These are the curves that bound synthesis regions; the open far end is
    symbolic (the ray is unbounded).
    """

    label: str
    family: int
    c: float
    y_anchor: float
    direction: int

    def x_at(self, y: float) -> float:
        return self.c + 0.5 * self.family * y * y

    def spans(self, y: float, tol: float = 0.0) -> bool:
        if self.direction > 0:
            return y >= self.y_anchor - tol
        return y <= self.y_anchor + tol


@dataclass(frozen=True)
class CharPoints:
    """Characteristic points present for a regime; absent points are ``None``."""

    regime: Regime
    A: Optional[State] = None
    B: Optional[State] = None
    C: Optional[State] = None
    E: Optional[State] = None
    F: Optional[State] = None
    C_star: Optional[State] = None
    m: Optional[float] = None
    rays: tuple[ParabolaRay, ...] = field(default=())

    def ray(self, label: str) -> ParabolaRay:
        for r in self.rays:
            if r.label == label:
                return r
        raise KeyError(label)


def classify_regime(spec: ProblemSpec) -> Regime:
    """Resolve the geometric case of the bound.

    Thresholds are decided by the exact sign of the discriminants
    ``2*b*k - 3`` and ``1 - 2*b*q`` so that exactly-representable threshold
    inputs classify exactly.
    """
    if spec.boundary == Boundary.NONE:
        return Regime.UNCONSTRAINED
    if spec.boundary == Boundary.HORIZONTAL:
        return Regime.HORIZONTAL
    if spec.boundary == Boundary.VERTICAL_RIGHT:
        return Regime.VERTICAL_RIGHT
    if spec.boundary == Boundary.VERTICAL_LEFT:
        return Regime.VERTICAL_LEFT
    k, b = spec.k, spec.b
    if k > 0:
        d = 2.0 * b * k - 3.0
        if d > 0:
            return Regime.POS_C_ABOVE_A
        if d < 0:
            return Regime.POS_C_BELOW_A
        return Regime.POS_C_EQUALS_A
    q = -k
    d = 1.0 - 2.0 * b * q
    if d > 0:
        return Regime.NEG_THREE
    if d < 0:
        return Regime.NEG_ONE
    return Regime.NEG_TWO


@lru_cache(maxsize=256)
def characteristic_points(spec: ProblemSpec) -> CharPoints:
    """Closed-form characteristic points and bounding half-parabolas."""
    regime = classify_regime(spec)

    if regime == Regime.UNCONSTRAINED:
        return CharPoints(regime)

    if regime == Regime.HORIZONTAL:
        b = spec.b
        return CharPoints(regime, A=State(0.5 * b * b, -b))

    if regime == Regime.VERTICAL_RIGHT:
        p = spec.p
        ray = ParabolaRay("CC'", -1, p, 0.0, +1)
        return CharPoints(regime, C=State(p, 0.0), rays=(ray,))

    if regime == Regime.VERTICAL_LEFT:
        p = spec.p
        ray = ParabolaRay("CC''", +1, -p, 0.0, -1)
        return CharPoints(regime, C=State(-p, 0.0), rays=(ray,))

    k, b = spec.k, spec.b
    if k > 0:
        w = math.sqrt(2.0 * b * k + 1.0)
        A = State(((b * k + 1.0) - w) / (k * k), (1.0 - w) / k)
        E = State(b / k, 0.0)
        C = State((k * b - 1.0) / (k * k), -1.0 / k)
        C_star = State((b * k + 1.0) / (k * k), 1.0 / k)
        m = (2.0 * k * b - 1.0) / (2.0 * k * k)
        B = State(0.5 * m, -math.sqrt(m)) if m > 0 else None
        ee_ray = ParabolaRay("EE'", -1, b / k, 0.0, +1)
        if regime == Regime.POS_C_BELOW_A:
            inner = ParabolaRay("AA'", -1, A.y * A.y, A.y, +1)
        else:
            inner = ParabolaRay("CC'", -1, m, C.y, +1)
        return CharPoints(regime, A=A, B=B, C=C, E=E, C_star=C_star, m=m,
                          rays=(inner, ee_ray))

    q = -k
    C = State((1.0 - b * q) / (q * q), -1.0 / q)
    m = (1.0 - 2.0 * b * q) / (2.0 * q * q)
    c_plus = m                       # offset of the +1 tangent parabola through C
    c_minus = c_plus + 1.0 / (q * q)  # offset of the -1 parabola through C
    cc2 = ParabolaRay("CC''", +1, c_plus, C.y, -1)
    if regime == Regime.NEG_THREE:
        w = math.sqrt(1.0 - 2.0 * b * q)
        F = State(((1.0 - b * q) - w) / (q * q), (-1.0 + w) / q)
        ff = ParabolaRay("FF'", -1, F.y * F.y, F.y, +1)
        cc1 = ParabolaRay("CC'", -1, c_minus, C.y, +1)
        return CharPoints(regime, C=C, F=F, m=m, rays=(ff, cc1, cc2))
    if regime == Regime.NEG_TWO:
        cc1 = ParabolaRay("CC'", -1, c_minus, C.y, +1)
        return CharPoints(regime, C=C, m=m, rays=(cc1, cc2))
    return CharPoints(regime, C=C, m=m, rays=(cc2,))


def boundary_eval(spec: ProblemSpec, x: float) -> Optional[float]:
    """Velocity level of the bound at position ``x``; ``None`` when the bound
    is vertical or absent."""
    if spec.boundary == Boundary.SLOPED:
        return spec.k * x - spec.b
    if spec.boundary == Boundary.HORIZONTAL:
        return -spec.b
    return None


def constraint_residual(spec: ProblemSpec, x: float, y: float) -> float:
    """Signed slack of the state bound (nonnegative inside the feasible set)."""
    if spec.boundary == Boundary.SLOPED:
        return y - spec.k * x + spec.b
    if spec.boundary == Boundary.HORIZONTAL:
        return y + spec.b
    if spec.boundary == Boundary.VERTICAL_RIGHT:
        return spec.p - x
    if spec.boundary == Boundary.VERTICAL_LEFT:
        return x + spec.p
    return math.inf


def gamma_x(spec: ProblemSpec, y: float) -> float:
    """Position of the sloped bound line at velocity ``y``."""
    assert spec.boundary == Boundary.SLOPED
    return (y + spec.b) / spec.k
