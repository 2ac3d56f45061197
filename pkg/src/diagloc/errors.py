"""Exception types shared across the package."""


class DiaglocError(Exception):
    """Base class for package errors."""


class InvalidInput(DiaglocError, ValueError):
    """Malformed or out-of-range input."""


class InfeasibleSearch(DiaglocError):
    """A requested search is too large to run."""
