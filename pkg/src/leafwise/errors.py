"""Exception types shared across the package."""


class LeafwiseError(Exception):
    """Base class for all package errors."""


class GridMismatchError(LeafwiseError, ValueError):
    """Two fields live on different grids."""


class NonPositiveError(LeafwiseError, ValueError):
    """A quantity that must be strictly positive is not."""


class ConvergenceError(LeafwiseError, RuntimeError):
    """An iterative method stopped without meeting its tolerance."""


class HypothesisError(LeafwiseError, ValueError):
    """A required inequality or sign condition fails.

    ``check`` names the failing condition so callers can report it.
    """

    def __init__(self, message, check=None):
        super().__init__(message)
        self.check = check


class TranscriptionError(LeafwiseError, RuntimeError):
    """A closed-form formula disagrees with its generic counterpart."""


class ConfigError(LeafwiseError, ValueError):
    """Invalid scenario or configuration."""
