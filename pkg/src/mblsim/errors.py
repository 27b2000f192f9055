"""Exception taxonomy shared by the library and the CLI.

The CLI maps these onto exit codes: configuration problems exit 2,
resource-limit refusals exit 3, numerical failures exit 4.
"""


class MblsimError(Exception):
    """Base class for all package errors."""


class DomainError(MblsimError, ValueError):
    """Input outside an operation's mathematical domain."""


class ConfigurationError(MblsimError, ValueError):
    """Malformed or inconsistent configuration input."""

    exit_code = 2


class ResourceLimitError(MblsimError, RuntimeError):
    """Request exceeds a declared size or memory cap."""

    exit_code = 3


class NumericalError(MblsimError, RuntimeError):
    """A numerical routine failed to reach its accuracy contract."""

    exit_code = 4


class UnsupportedDimensionError(DomainError):
    """Operation requires qubit (dimension-2) sites."""


class ResolutionError(MblsimError, ValueError):
    """Sampled data is too coarse for the requested evaluation."""
