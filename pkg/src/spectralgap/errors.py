"""Exception hierarchy shared by the numerical modules."""


class SpectralGapError(Exception):
    """Base class for all package errors."""


class DomainError(SpectralGapError, ValueError):
    """Argument outside the domain of a model function or operation."""


class PreconditionError(SpectralGapError, ValueError):
    """Operation called with arguments violating its contract."""


class IntegrationError(SpectralGapError, RuntimeError):
    """ODE integration failed (non-finite state, step limit)."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NoCriticalPointError(SpectralGapError, RuntimeError):
    """No zero of v' before the end of the integration domain."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class BracketError(SpectralGapError, RuntimeError):
    """A bracketing scan failed to enclose a root."""


class MethodDisagreement(SpectralGapError, RuntimeError):
    """Shooting and discretization disagree beyond tolerance."""
