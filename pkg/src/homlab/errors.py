"""Exception types shared across the package."""


class HomlabError(Exception):
    """Base class for all homlab-specific errors."""


class GraphFormatError(HomlabError):
    """A graph file or JSON document could not be parsed."""


class ResourceLimitError(HomlabError):
    """A generator basis exceeded the configured size cap."""

    def __init__(self, message, limit=None, requested=None):
        super().__init__(message)
        self.limit = limit
        self.requested = requested


class ContractViolationError(HomlabError):
    """An internal mathematical invariant failed (e.g. boundary of a
    boundary was nonzero, or a chain left the submodule it must live in).

    Seeing this exception means a bug, not bad user input.
    """
