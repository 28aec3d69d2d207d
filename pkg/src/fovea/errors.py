"""Exception types raised across the library.

Every failure mode has its own class so callers can catch precisely; all of
them derive from :class:`FoveaError`.
"""


class FoveaError(Exception):
    """Base class for all library errors."""


# --- tensor / image construction and access ---------------------------------

class UnsupportedDtype(FoveaError):
    """Element type outside the supported set, or mismatched operand dtypes."""


class LengthMismatch(FoveaError):
    """Flat data length does not match the shape's element count."""


class IndexOutOfBounds(FoveaError):
    """Multi-index outside the tensor's shape."""


class NumelMismatch(FoveaError):
    """Reshape target has a different element count."""


class NonContiguous(FoveaError):
    """Operation requires contiguous row-major storage."""


class RangeOutOfBounds(FoveaError):
    """Slice range exceeds the extent of its dimension."""


class ShapeMismatch(FoveaError):
    """Operand shapes differ where equality is required."""


class DivisionByZero(FoveaError, ZeroDivisionError):
    """Integer element-wise division with a zero divisor element."""


class EmptyTensor(FoveaError):
    """Reduction over a tensor with no elements."""


class SizeMismatch(FoveaError):
    """Source and destination image sizes differ."""


class RegionOutOfBounds(FoveaError):
    """Crop region extends past the image bounds."""


class AliasedBuffers(FoveaError):
    """Source and destination share storage where they must be distinct."""


class UnsupportedKernelSize(FoveaError):
    """Filter kernel size outside the supported set."""


# --- codecs ------------------------------------------------------------------

class CorruptStream(FoveaError):
    """Byte stream is not a well-formed instance of the expected format."""


class UnsupportedPngFeature(FoveaError):
    """Valid PNG using a feature outside the supported subset."""


class UnsupportedJpegFeature(FoveaError):
    """Valid JPEG using a feature outside the supported subset (e.g. progressive)."""


class InvalidQuality(FoveaError):
    """JPEG quality outside 1..=100."""


class UnknownFormat(FoveaError):
    """Byte stream matches no supported container's magic."""


# --- point clouds / PLY ------------------------------------------------------

class InvalidPointCloud(FoveaError):
    """Point cloud construction with non-finite or mis-shaped data."""


class MalformedHeader(FoveaError):
    """PLY header cannot be parsed."""


class UnsupportedFormat(FoveaError):
    """PLY format variant outside ascii / binary_little_endian."""


class TruncatedBody(FoveaError):
    """PLY body ends before the declared element count."""


class IoFailure(FoveaError):
    """Underlying file I/O failed."""


# --- registration ------------------------------------------------------------

class EmptyPointSet(FoveaError):
    """Spatial index construction over zero points."""


class EmptySet(FoveaError):
    """Error metric over zero correspondences."""


class DegenerateConfiguration(FoveaError):
    """Too few or rank-deficient correspondences for a rigid fit."""


# --- benchmarking ------------------------------------------------------------

class UnknownOp(FoveaError):
    """Benchmark operation name not in the registry."""


class FixtureFailure(FoveaError):
    """Benchmark fixture could not be constructed."""
