"""Exception and warning types shared across the package."""


class Rgbd360Error(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(Rgbd360Error, ValueError):
    """Two inputs that must share dimensions do not."""


class ShapeMismatch(DimensionMismatch):
    """Array shapes that must agree do not."""


class EmptyIntersection(Rgbd360Error, ValueError):
    """No pixel is valid in both masks."""


class DegenerateFit(Rgbd360Error, ValueError):
    """Least-squares fit is underdetermined (constant estimate)."""


class NoValidPixels(Rgbd360Error, ValueError):
    """Metric requested over a mask with no valid pixels."""


class TooFewSamples(Rgbd360Error, ValueError):
    """Not enough samples for the requested statistic."""


class EmptySet(Rgbd360Error, ValueError):
    """An input collection that must be non-empty is empty."""


class EmptyDataset(EmptySet):
    """Training data is empty."""


class ZeroVector(Rgbd360Error, ValueError):
    """A row with zero norm where a direction is required."""


class InvalidRange(Rgbd360Error, ValueError):
    """A numeric parameter is outside its documented range."""


class ConfigInvalid(Rgbd360Error, ValueError):
    """A sampling configuration violates its constraints."""


class InvalidTessellation(Rgbd360Error, ValueError):
    """Sphere tessellation counts below the supported minimum."""


class ViewpointOutsideMesh(Rgbd360Error, ValueError):
    """Camera position is not strictly inside the displaced surface."""


class MissingAsset(Rgbd360Error, FileNotFoundError):
    """A required scene asset is absent."""


class MalformedScene(Rgbd360Error, ValueError):
    """Scene bundle fails structural validation."""


class VersionMismatch(MalformedScene):
    """Scene bundle format version is not supported."""


class NonZeroHighChannel(UserWarning):
    """High byte of a packed depth image is non-zero: 24-bit data was
    truncated to 16 bits on unpacking."""
