"""Exception types shared across the package."""


class SalboxError(Exception):
    """Base class for every error raised by this package."""


class InvalidBox(SalboxError):
    """A box violates the x1 < x2, y1 < y2 ordering."""


class EmptyAfterClamp(SalboxError):
    """Clamping a box against the raster extent left no pixels."""


class ParseError(SalboxError):
    """A file could not be parsed in any accepted format."""


class DimensionMismatch(SalboxError):
    """A loaded raster does not match the expected width and height."""


class EmptyBackground(SalboxError):
    """Geodesic saliency needs at least one background node."""


class NoFiniteValues(SalboxError):
    """A saliency map holds no finite value to normalize against."""


class NoGroundTruth(SalboxError):
    """Evaluation requires at least one ground-truth box."""


class ConfigError(SalboxError):
    """Bad or inconsistent pipeline configuration."""
