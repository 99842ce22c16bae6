"""Exception hierarchy.

The CLI maps :class:`DomainError` to exit code 1 and :class:`ConfigError`
to exit code 2.
"""


class ConeKitError(Exception):
    pass


class DomainError(ConeKitError, ValueError):
    """A mathematical precondition failed (wrong signature, point on a wall, ...)."""


class ConfigError(ConeKitError, ValueError):
    """Bad user input: unknown preset, malformed vector string, bad file."""
