"""Exception types shared across the package."""


class IfsError(Exception):
    """Base class for all package-specific errors."""


class OutOfRangeSymbol(IfsError):
    """Symbol index outside 1..k."""


class NonFinitePoint(IfsError):
    """A point contained NaN or infinity."""


class AtBreakpoint(IfsError):
    """Derivative requested exactly at a piecewise breakpoint; pass side='left' or 'right'."""


class UnsupportedFamily(IfsError):
    """No closed-form bound exists for this map family."""


class DegenerateDomain(IfsError):
    """Sampling domain is empty or has zero volume."""


class ProbabilityFloor(IfsError):
    """A selection probability of zero was encountered."""


class TooFewPoints(IfsError):
    """Operation needs more sample points than were given."""


class EmptyMeasure(IfsError):
    """Empirical measure has no support points."""


class EmptyInput(IfsError):
    """No trajectories supplied."""


class DimensionMismatch(IfsError):
    """Operation restricted to a different ambient dimension."""


class NonFiniteOrbit(IfsError):
    """Chaos-game orbit left the finite range."""

    def __init__(self, step: int):
        super().__init__(f"orbit became non-finite at step {step}")
        self.step = step


class TooShort(IfsError):
    """Trajectory shorter than the estimator requires."""


class TooFewTrajectories(IfsError):
    """Tail diagnostic needs more independent trajectories."""


class NonNegativeLyapunov(IfsError):
    """Dimension ratio requested with a non-negative Lyapunov exponent,
    so the system is not contracting-on-average along this estimate."""


class InsufficientRange(IfsError):
    """Fewer than 3 radii survived the mass floor/cap filters."""


class AllCentersDiscarded(IfsError):
    """No sampled center produced a usable local-dimension fit."""


class BudgetExceeded(IfsError):
    """Word sampling would exceed the configured cap."""


class OscViolated(IfsError):
    """Separation requested but the open set condition does not hold."""


class UnsupportedGeometry(IfsError):
    """Exact geometry unavailable for this map family / dimension."""


class DegenerateSet(IfsError):
    """Open set is empty after canonicalization."""


class InvalidProbability(IfsError):
    """Probability parameter outside (0, 1) or simplex violated."""


class ShapeMismatch(IfsError):
    """Parameter lists have inconsistent lengths."""


class ConfigError(IfsError):
    """Malformed run configuration; message names the offending key."""


class BelowThresholdWarning(UserWarning):
    """Closed-form dimension evaluated outside its stated parameter regime."""
