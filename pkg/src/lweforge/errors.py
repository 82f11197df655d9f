"""Exception types shared across the package."""


class ForgeError(Exception):
    """Base class for all package-specific errors."""


class DataError(ForgeError):
    """Malformed, inconsistent, or missing input data (CLI exit code 2)."""


class FormatError(DataError):
    """A serialized artifact does not match the documented layout."""


class EmptyDatasetError(DataError):
    """A dataset directory contains no usable batches."""


class DependentBasisError(ForgeError):
    """Input rows to a reduction routine are linearly dependent."""


class DegenerateBasisError(ForgeError):
    """A basis has no rows usable for the reduction statistic."""


class EnumerationCapError(ForgeError):
    """A brute-force candidate enumeration would exceed its size cap."""


class InsufficientDataError(ForgeError):
    """Not enough samples to carry out a requested estimation step."""
