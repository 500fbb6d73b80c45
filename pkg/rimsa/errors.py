"""Exception hierarchy shared by every rimsa sub-package."""


class RimsaError(Exception):
    """Base class for all rimsa errors."""


class ConfigError(RimsaError):
    """Invalid or incomplete configuration."""


class GeometryError(RimsaError):
    """Degenerate geometry or an unsupported aperture index scheme."""


class ShapeError(RimsaError, ValueError):
    """Array shapes or lengths are incompatible."""


class DomainError(RimsaError, ValueError):
    """A value lies outside the domain of the requested operation."""


class SingularMatrixError(RimsaError):
    """A linear system could not be solved without regularization."""


class FormatError(RimsaError):
    """A binary artifact has a bad magic, version, or truncated body."""


class EmptyDatasetError(RimsaError):
    """An operation needs at least one sample."""


class SequenceOverflowError(RimsaError):
    """A token sequence is longer than the configured maximum."""
