"""Exception types shared across the package."""


class QimagError(Exception):
    """Base class for package errors."""


class DomainError(QimagError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class PreconditionError(QimagError, ValueError):
    """A documented operation precondition is violated (e.g. grid mismatch)."""


class StabilityError(QimagError, ValueError):
    """A requested time step exceeds the documented stability bound."""


class SingularScheduleError(QimagError, ValueError):
    """A phase-schedule trajectory touches or crosses a singular angle."""


class UnknownIdentityError(QimagError, KeyError):
    """Audit lookup for an identity name not in the registry."""


class ConfigError(QimagError, ValueError):
    """A scenario configuration file is missing, malformed or inconsistent."""
