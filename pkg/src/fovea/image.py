"""Channel-parameterized images over rank-3 tensors.

An image is a [height, width, channels] tensor with interleaved channels and
contiguous row-major storage. The channel count and dtype are fixed when the
image is created; `ImageType` gives named, reusable (dtype, channels)
combinations in the spirit of user-defined aliases.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import RegionOutOfBounds, ShapeMismatch, SizeMismatch, UnsupportedDtype
from .tensor import Tensor, TensorView, _Strided, row_major_strides


@dataclass(frozen=True)
class ImageSize:
    """Width and height in pixels; zero dimensions are rejected."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ShapeMismatch(f"image dimensions must be >= 1, got {self.width}x{self.height}")


class _PixelGrid:
    """Shared read surface of owning images and crop views."""

    __slots__ = ("_data", "_channels")

    @property
    def data(self) -> _Strided:
        """Underlying rank-3 tensor (or view), shape [H, W, C]."""
        return self._data

    @property
    def channels(self) -> int:
        return self._channels

    @property
    def dtype(self) -> np.dtype:
        return self._data.dtype

    @property
    def size(self) -> ImageSize:
        h, w, _ = self._data.shape
        return ImageSize(width=w, height=h)

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def height(self) -> int:
        return self._data.shape[0]

    def as_array(self) -> np.ndarray:
        """Zero-copy (H, W, C) numpy view."""
        return self._data.as_array()

    def crop_view(self, x: int, y: int, w: int, h: int) -> "ImageView":
        """Zero-copy crop; pixel (r, c) of the view is pixel (y+r, x+c) here."""
        if w < 1 or h < 1:
            raise RegionOutOfBounds(f"crop size must be >= 1x1, got {w}x{h}")
        if x < 0 or y < 0 or x + w > self.width or y + h > self.height:
            raise RegionOutOfBounds(
                f"crop ({x},{y},{w},{h}) outside {self.width}x{self.height} image"
            )
        view = self._data.slice_view([(y, y + h), (x, x + w), (0, self._channels)])
        return ImageView(view, self._channels)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.width}x{self.height}x{self._channels}, {self.dtype})"


class Image(_PixelGrid):
    """Owning H x W x C image with contiguous interleaved storage."""

    __slots__ = ()

    def __init__(self, data: Tensor, channels: int | None = None):
        if data.rank != 3:
            raise ShapeMismatch(f"image tensor must be rank 3, got rank {data.rank}")
        if channels is not None and data.shape[2] != channels:
            raise ShapeMismatch(f"tensor has {data.shape[2]} channels, expected {channels}")
        if data.strides != row_major_strides(data.shape):
            raise ShapeMismatch("image storage must be contiguous row-major")
        ImageSize(width=data.shape[1], height=data.shape[0])
        self._data = data
        self._channels = data.shape[2]

    @classmethod
    def from_size_val(cls, size: ImageSize, value, channels: int, dtype, alloc=None) -> "Image":
        """Constant-filled image; one allocation."""
        t = Tensor.from_shape_val((size.height, size.width, channels), value, dtype=dtype, alloc=alloc)
        return cls(t, channels)

    @classmethod
    def from_slice(cls, size: ImageSize, data, channels: int, dtype=None, alloc=None) -> "Image":
        """Image from a flat interleaved row-major sequence."""
        t = Tensor.from_shape_slice((size.height, size.width, channels), data, dtype=dtype, alloc=alloc)
        return cls(t, channels)

    @classmethod
    def from_array(cls, arr: np.ndarray, alloc=None) -> "Image":
        """Image copying an (H, W, C) numpy array."""
        if arr.ndim != 3:
            raise ShapeMismatch(f"expected (H, W, C) array, got ndim {arr.ndim}")
        t = Tensor.from_shape_slice(arr.shape, np.ascontiguousarray(arr).reshape(-1), dtype=arr.dtype, alloc=alloc)
        return cls(t, arr.shape[2])


class ImageView(_PixelGrid):
    """Zero-copy window into another image."""

    __slots__ = ()

    def __init__(self, data: TensorView, channels: int):
        self._data = data
        self._channels = channels


@dataclass(frozen=True)
class ImageType:
    """A reusable (dtype, channels) image alias, e.g. RGB8 or GRAY8."""

    dtype: np.dtype
    channels: int

    def __post_init__(self):
        object.__setattr__(self, "dtype", np.dtype(self.dtype))

    def from_size_val(self, size: ImageSize, value, alloc=None) -> Image:
        return Image.from_size_val(size, value, self.channels, self.dtype, alloc=alloc)

    def from_slice(self, size: ImageSize, data, alloc=None) -> Image:
        return Image.from_slice(size, data, self.channels, self.dtype, alloc=alloc)


RGB8 = ImageType(np.uint8, 3)
GRAY8 = ImageType(np.uint8, 1)
RGBD16 = ImageType(np.uint16, 4)


def to_float_scaled(src: _PixelGrid, dst: _PixelGrid) -> None:
    """Write src / 255 into a caller-provided f32 image; no allocations."""
    if src.dtype != np.uint8:
        raise UnsupportedDtype(f"source must be u8, got {src.dtype}")
    if dst.dtype != np.float32:
        raise UnsupportedDtype(f"destination must be f32, got {dst.dtype}")
    if src.size != dst.size or src.channels != dst.channels:
        raise SizeMismatch(f"source {src!r} and destination {dst!r} differ")
    out = dst.as_array()
    np.copyto(out, src.as_array(), casting="unsafe")
    out /= np.float32(255.0)
