"""Exception types shared across the package."""


class TocSynthError(Exception):
    """Base class for all package-specific errors."""


class InadmissibleStart(TocSynthError):
    """No constraint-respecting trajectory from this start reaches the origin."""


class DirectionMismatch(TocSynthError):
    """A bang arc was requested against the sign of its own control."""


class OffBoundary(TocSynthError):
    """A boundary-slide arc was requested from a state not on the bound."""


class OutOfSlideRange(TocSynthError):
    """A boundary-slide arc was requested outside the feasible slide segment."""


class NotOptimalPlan(TocSynthError):
    """The plan's arc structure matches no known optimal construction."""


class NonConvergence(TocSynthError):
    """Value iteration hit its iteration cap before meeting the sup-norm tolerance."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NoFeasibleStructure(TocSynthError):
    """The structure search found no feasible arc sequence reaching the origin."""
