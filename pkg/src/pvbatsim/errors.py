"""Exception types shared across the simulator."""


class PvbatsimError(Exception):
    """Base class for all simulator errors."""


class DomainError(PvbatsimError, ValueError):
    """An argument lies outside the physical domain of an operation."""


class ConvergenceError(PvbatsimError):
    """An iterative solver failed to meet its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SingularityGuardError(PvbatsimError):
    """A battery voltage law was evaluated too close to its SOC singularity."""


class ConfigError(PvbatsimError, ValueError):
    """A configuration file or value failed validation."""


class ProfileError(PvbatsimError, ValueError):
    """A time-series profile failed validation."""


class InvariantViolation(PvbatsimError):
    """A runtime consistency check (power balance, ledger closure) failed."""
