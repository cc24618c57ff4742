"""Exception hierarchy shared across the package."""


class GridcastError(Exception):
    """Base class for all package-specific errors."""


class InvalidGridError(GridcastError):
    """Grid geometry violates its invariants (latitude range, monotonicity, spacing)."""


class ShapeMismatchError(GridcastError):
    """Operands have incompatible shapes or catalogs."""


class DegenerateChannelError(GridcastError):
    """A channel has (near-)zero variance and cannot be standardized."""


class DataFormatError(GridcastError):
    """On-disk data is unreadable: bad version, checksum failure, truncation."""


class NonFiniteError(GridcastError):
    """A NaN or infinity appeared where finite values are required."""


class EmptyMaskError(GridcastError):
    """A score was requested over a region mask with no cells."""


class LeadMismatchError(GridcastError):
    """Two per-lead series do not cover the same lead times."""


class UsageError(GridcastError):
    """Invalid arguments or configuration supplied by the caller."""
