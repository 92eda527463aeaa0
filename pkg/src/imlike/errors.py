"""Exception types shared across the package."""

__all__ = [
    "IMError",
    "InvalidParameterError",
    "DomainError",
    "DegenerateDataError",
    "ConvergenceError",
    "DatasetError",
]


class IMError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(IMError):
    """A parameter value violates its documented constraint."""


class DomainError(IMError):
    """A parameter point lies outside the model's domain."""


class DegenerateDataError(IMError):
    """The data admit no well-defined inferential target."""


class ConvergenceError(IMError):
    """An iterative routine failed to converge.

    ``payload`` carries whatever partial state is useful for debugging,
    e.g. the last iterate or the bracket that was searched.
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class DatasetError(IMError):
    """A dataset could not be read or fails validation."""
