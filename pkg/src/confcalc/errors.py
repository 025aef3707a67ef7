"""Exception types shared across the package."""


class ConfcalcError(Exception):
    pass


class ContourSingularityError(ConfcalcError, ArithmeticError):
    """A contour node produced a non-finite sample."""


class DegenerateDerivativeError(ConfcalcError, ArithmeticError):
    pass


class NoConvergenceError(ConfcalcError, RuntimeError):
    """An iteration failed to converge; ``last_iterate`` holds its final state."""

    def __init__(self, message, last_iterate=None, diagnostics=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.diagnostics = diagnostics or {}


class StepTooLargeError(ConfcalcError, ValueError):
    pass


class HorizonExceededError(ConfcalcError, ValueError):
    def __init__(self, message, max_valid_t=None):
        super().__init__(message)
        self.max_valid_t = max_valid_t


class InvalidDeformationError(ConfcalcError, ValueError):
    pass


class DeviationTooLargeError(ConfcalcError, ValueError):
    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class SingularConfigurationError(ConfcalcError, ValueError):
    pass


class ConfigError(ConfcalcError, ValueError):
    """Malformed experiment configuration."""
