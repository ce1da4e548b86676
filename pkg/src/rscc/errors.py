"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so library code raises them instead of
returning status values.
"""


class RsccError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(RsccError, ValueError):
    pass


class DomainError(RsccError, ValueError):
    """A point or state lies outside the space it is supposed to live in."""


class ConfigurationError(RsccError, ValueError):
    pass


class UnsupportedMap(RsccError, TypeError):
    """The operation needs a map family it was not given (usually monomial)."""


class ResourceError(RsccError, RuntimeError):
    """An enumeration would exceed its configured cap."""
