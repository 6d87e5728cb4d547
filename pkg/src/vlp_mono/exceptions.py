"""Exception hierarchy.

Everything raised on bad geometry or bad input derives from ``VLPError`` (and
from ``ValueError``), so callers can catch either.
"""


class VLPError(ValueError):
    pass


class ConfigError(VLPError):
    """Invalid scenario, intrinsics or transmitter description."""


class GeometryError(VLPError):
    """A geometric precondition does not hold."""


class BehindCameraError(GeometryError):
    pass


class CollinearError(GeometryError):
    pass


class DegenerateImageError(GeometryError):
    """Two image points coincide, so no scale can be recovered from them."""


class InsufficientFeaturesError(GeometryError):
    pass


class ImplausibleDepthError(GeometryError):
    pass


class ConvergenceError(VLPError):
    pass
