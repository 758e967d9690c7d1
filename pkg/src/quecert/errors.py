"""Exception types shared across the package.

Everything user-facing derives from QueError so the CLI can map failures
to exit codes without inspecting messages.
"""


class QueError(Exception):
    """Base class for all package errors."""


class DomainError(QueError, ValueError):
    """Invalid mathematical input: wrong shapes, non-positive weights,
    levels out of range, malformed cell words."""


class LevelCapError(DomainError):
    """Requested refinement level exceeds the configured cap."""


class ConfigError(QueError, ValueError):
    """Invalid run configuration (CLI flags, config file, obstacle layout)."""


class NumericsError(QueError, RuntimeError):
    """A numerical routine failed to converge or produced garbage
    (indefinite metric, eigensolver breakdown, singular pencil)."""


class BoundViolationError(QueError, RuntimeError):
    """A certified inequality failed at the requested tolerance."""
