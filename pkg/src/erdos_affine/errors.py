"""Exception hierarchy shared by every module."""


class ErdosAffineError(Exception):
    """Base class for all library errors."""


class DomainError(ErdosAffineError, ValueError):
    """An input lies outside the domain of an operation."""


class ResourceError(ErdosAffineError):
    """A requested grid would exceed the configured cell cap."""


class BoundaryUndecidable(ErdosAffineError):
    """A singular value sits on a band threshold and cannot be separated from it."""


class SearchExhausted(ErdosAffineError):
    """A bounded scan of an infinite sequence found no qualifying index."""


class SearchFailed(ErdosAffineError):
    """The stage search ran out of budget without accepting a selection."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats if stats is not None else []
