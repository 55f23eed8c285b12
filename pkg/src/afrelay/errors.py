"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class UnsupportedConfiguration(ValueError):
    """Raised when closed-form routines are asked to handle unbalanced params."""


class OutOfDomain(ValueError):
    pass


class DegenerateState(ValueError):
    pass


class InfeasibleTarget(ValueError):
    """Outage target at or below the outage floor."""


class NumericalFailure(RuntimeError):
    """Quadrature or root finding did not converge.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (bracket, last residual, evaluation count, ...).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class CutoffCapReached(NumericalFailure):
    """The constraint is still slack at the largest admissible cutoff."""
