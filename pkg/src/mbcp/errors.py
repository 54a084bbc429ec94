"""Exception types shared across the package."""


class DomainError(ValueError):
    """An operation was evaluated outside its mathematical domain."""


class ResourceLimitError(RuntimeError):
    """A result would exceed a configured size or enumeration limit."""


class UsageError(ValueError):
    """Invalid user-facing input: bad option combination or malformed file."""
