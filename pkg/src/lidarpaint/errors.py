"""Exception types shared across the toolkit."""


class LidarPaintError(Exception):
    """Base class for all toolkit errors."""


class MissingKeyError(LidarPaintError):
    """A required key is absent from a calibration file."""


class MalformedNumberError(LidarPaintError):
    """A calibration value could not be parsed, or has the wrong count."""


class SingularIntrinsicsError(LidarPaintError):
    """The left 3x3 block of the camera matrix is not invertible."""


class DimensionMismatchError(LidarPaintError):
    """Array dimensions disagree with the calibration's image size."""


class LayoutMismatchError(LidarPaintError):
    """Two point clouds do not share the same column layout."""


class ZeroRadiusError(LidarPaintError):
    """A point or box center sits exactly at the sensor origin."""


class MissingInputError(LidarPaintError):
    """A per-frame input file required by a pipeline stage is absent."""


class FileFormatError(LidarPaintError):
    """A binary artifact has a bad magic number or inconsistent header."""
