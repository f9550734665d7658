"""Exception types shared across the package."""


class SemiboltzError(Exception):
    """Base class for all package errors."""


class ResolutionError(SemiboltzError):
    """Grid too coarse for the requested construction."""


class DomainError(SemiboltzError):
    """Input outside the supported domain (unknown family, off-table speed, ...)."""


class AccuracyError(SemiboltzError):
    """A quadrature failed its self-consistency (refinement) check."""


class StepSizeError(SemiboltzError):
    """Time step violates a propagation stability precondition."""

    def __init__(self, msg: str, suggested_dt: float | None = None):
        super().__init__(msg)
        self.suggested_dt = suggested_dt


class TruncationError(SemiboltzError):
    """Series truncation tail exceeds the requested tolerance."""

    def __init__(self, msg: str, suggested_n_max: int | None = None):
        super().__init__(msg)
        self.suggested_n_max = suggested_n_max


class ExtrapolationError(SemiboltzError):
    """Invalid regularisation trace (non-monotone, too short, ...)."""


class UnsupportedError(SemiboltzError):
    """Operation not available for this input kind."""


class ResourceError(SemiboltzError):
    """Estimated cost exceeds the configured budget, or a sampling cap was hit."""


class EstimateViolation(SemiboltzError):
    """A printed inequality check failed; carries the offending sample."""

    def __init__(self, msg: str, report=None):
        super().__init__(msg)
        self.report = report


class DivergenceWarning(UserWarning):
    """Born partial sums are not in the geometric-decay regime."""
