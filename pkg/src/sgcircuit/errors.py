"""Exception hierarchy shared by all sgcircuit modules."""


class SgCircuitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SgCircuitError, ValueError):
    """Inputs are well-formed but outside the physical domain of a calculation."""


class GaplessRegimeError(DomainError):
    pass


class UnsupportedPhaseError(DomainError):
    pass


class ConvergenceError(DomainError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegeneracyNotFoundError(DomainError):
    """Both branch descents ended in the same minimum.

    The unique minimum found is kept on ``state``.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ConfigError(SgCircuitError):
    """Malformed configuration, unknown command or unit mismatch."""
