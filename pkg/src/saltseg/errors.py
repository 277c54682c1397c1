"""Exception types shared across the package.

The CLI maps these onto process exit codes: validation and configuration
problems exit 1, I/O problems exit 2, numerical failures exit 3.
"""


class SaltSegError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(SaltSegError):
    """Invalid values, shapes, or domain violations in user-supplied data."""

    exit_code = 1


class ShapeError(ValidationError):
    """Array has the wrong dimensions for the requested operation."""


class FormatError(ValidationError):
    """Malformed text input (RLE strings, CSV rows, selector expressions)."""


class BoundsError(ValidationError):
    """A run or index extends past the end of the target image."""


class ConfigurationError(ValidationError):
    """Inconsistent or unsupported configuration."""


class CompatibilityError(ValidationError):
    """Checkpoint does not match the model spec it is being loaded into."""


class DataIOError(SaltSegError):
    """Failed to read or write an on-disk artifact."""

    exit_code = 2


class NumericsError(SaltSegError):
    """Training produced NaN/Inf; aborted rather than continuing silently."""

    exit_code = 3
