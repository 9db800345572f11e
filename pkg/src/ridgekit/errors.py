"""Exception types shared across the toolkit."""


class PreconditionError(ValueError):
    """An operation was called outside its declared preconditions."""


class DegenerateInputError(ValueError):
    """Input data is rank deficient in a way the estimator cannot absorb.

    Carries ``null_directions`` (a matrix whose columns span the unresolved
    directions) when the failure is a singular sample covariance.
    """

    def __init__(self, message, null_directions=None):
        super().__init__(message)
        self.null_directions = null_directions


class EmptyAccumulatorError(RuntimeError):
    """No sample pairs qualified for an accumulation-based estimator."""


class InfeasibleRegionError(RuntimeError):
    """The requested reduced coordinates admit no design inside the unit box.

    ``certificate`` holds the optimal (negative) uniform slack from the
    feasibility linear program.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class NumericalFailureError(RuntimeError):
    """Every attempted optimization path diverged to non-finite values."""
