"""Exception types shared across the package."""


class VlplError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(VlplError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class GeometryError(DomainError):
    """Degenerate pass-by geometry (e.g. zero range and zero offset)."""


class FieldOfViewError(DomainError):
    """Incidence angle at or beyond the source half-power semi-angle."""


class PeakUndefinedError(DomainError):
    """Received power has no interior maximum (non-positive decay exponent)."""


class TraceFormatError(VlplError):
    """Malformed trace file or trace data (carries a line number when known)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnitMismatchError(VlplError):
    """A trace carries a different unit than the operation requires."""


class TransformError(VlplError):
    """Distance transform produced no usable samples."""


class FitError(VlplError):
    """Regression cannot be performed (too few points, degenerate design)."""


class ConfigError(VlplError):
    """Invalid scenario, profile, or report document."""
