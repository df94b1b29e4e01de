"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class AccuracyError(ArithmeticError):
    """A numerical method failed to reach its tolerance.

    The best available estimate is kept on ``partial`` so callers can decide
    whether it is still usable.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
