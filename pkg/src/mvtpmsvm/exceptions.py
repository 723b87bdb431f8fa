"""
Exceptions raised across the toolkit.

Invalid inputs raise subclasses of ``ValueError`` so callers that already
catch ``ValueError`` keep working.
"""


class MvTpmError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(MvTpmError, ValueError):
    """An argument violates a documented precondition."""


class DataParseError(MvTpmError, ValueError):
    """A file or document could not be parsed into the expected structure."""


class SolverNotConvergedError(MvTpmError):
    """A dual solver hit its iteration cap without meeting the tolerance."""


class ManifestError(InvalidArgumentError):
    """A dataset manifest is incomplete or contradicts itself."""
