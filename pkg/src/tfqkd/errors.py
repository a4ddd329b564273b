"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class NumericFailure(RuntimeError):
    """A quadrature or optimization routine could not reach its accuracy target.

    Carries the accuracy that was actually achieved so callers can decide
    whether to retry with a larger work budget.
    """

    def __init__(self, message, achieved=None, target=None):
        super().__init__(message)
        self.achieved = achieved
        self.target = target
