"""Exception types raised across the package."""


class StarcalcError(Exception):
    """Base class for all package-specific errors."""


class DuplicatePoint(StarcalcError):
    """Ground configuration contains two identical points."""


class TooLarge(StarcalcError):
    """Requested ground size exceeds the supported maximum."""


class OutsideBox(StarcalcError):
    """Point lies outside the phase-space box."""


class GroundMismatch(StarcalcError):
    """Binary operation on set functions over different grounds."""


class OverlappingGrounds(StarcalcError):
    """Two-type construction requires disjoint plus/minus grounds."""


class OverlappingConfigurations(StarcalcError):
    """Configurations expected to be disjoint share a point."""


class NotInIdeal(StarcalcError):
    """Series argument must vanish on the empty configuration."""


class NotNormalized(StarcalcError):
    """Argument must equal 1 on the empty configuration."""


class IndexOutOfRange(StarcalcError, IndexError):
    """Point or mask index outside the valid range."""


class ZeroMassWindow(StarcalcError):
    """Sampling window has zero reference mass."""


class QuadratureFailure(StarcalcError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class NegativeDensity(StarcalcError):
    """A function playing a density took a negative value."""


class GrowthViolation(StarcalcError):
    """Declared or observed growth is incompatible with convergence."""


class DivergentSeries(StarcalcError):
    """Operator series shows no sign of converging."""


class IntegrationBudgetExceeded(StarcalcError):
    """Requested accuracy is unreachable within the sample budget."""


class HypothesisViolated(StarcalcError):
    """Parameters violate the hypotheses of the requested inequality."""
