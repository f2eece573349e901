"""Exception types shared across the package."""


class BudgetExceeded(RuntimeError):
    """An enumeration or rasterisation would exceed its work budget."""


class ToleranceNotReached(RuntimeError):
    """A computation could not certify its result at the requested tolerance.

    ``partial`` carries the best available result, when there is one.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConsistencyError(RuntimeError):
    """Two routes to the same quantity disagreed beyond tolerance."""
