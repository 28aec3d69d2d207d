"""Image-processing kernels writing into caller-provided output buffers.

None of these functions allocate tensors: the destination image is created
once by the caller and reused across calls, which keeps hot loops free of
allocator traffic. All kernels are deterministic; repeated runs on the same
inputs produce bit-identical outputs.

Coordinate convention for resizing: pixel centers of the source and
destination grids are aligned (half-pixel offset), so a same-size resize is
an exact identity. The continuous source coordinate of destination pixel x is
    sx = (x + 0.5) * src_w / dst_w - 0.5
Nearest-neighbor takes round-half-down of sx (ties go to the lower index);
bilinear blends the two surrounding samples per axis with edge clamping.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    AliasedBuffers,
    SizeMismatch,
    UnsupportedDtype,
    UnsupportedKernelSize,
)
from .image import _PixelGrid

# BT.601 luma weights.
_WR, _WG, _WB = 0.299, 0.587, 0.114

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])


def _check_same_size(src: _PixelGrid, dst: _PixelGrid) -> None:
    if src.size != dst.size:
        raise SizeMismatch(f"source {src!r} and destination {dst!r} differ in size")


def _check_distinct(src: _PixelGrid, dst: _PixelGrid) -> None:
    if np.shares_memory(src.as_array(), dst.as_array()):
        raise AliasedBuffers("source and destination must not share storage")


def gray_from_rgb(src: _PixelGrid, dst: _PixelGrid) -> None:
    """BT.601 grayscale: 0.299 R + 0.587 G + 0.114 B per pixel.

    The u8 path rounds half away from zero; the f32 path keeps float output.
    """
    if src.channels != 3 or dst.channels != 1:
        raise SizeMismatch(f"expected 3-channel source and 1-channel destination, got {src.channels} and {dst.channels}")
    if src.dtype != dst.dtype:
        raise UnsupportedDtype(f"source {src.dtype} and destination {dst.dtype} must match")
    _check_same_size(src, dst)
    a = src.as_array()
    out = dst.as_array()[:, :, 0]
    if src.dtype == np.uint8:
        g = a[:, :, 0] * _WR + a[:, :, 1] * _WG + a[:, :, 2] * _WB
        np.floor(g + 0.5, out=g)  # weights are non-negative, so half-away == half-up
        out[...] = g.astype(np.uint8)
    elif src.dtype == np.float32:
        a64 = a.astype(np.float64)
        g = a64[:, :, 0] * _WR + a64[:, :, 1] * _WG + a64[:, :, 2] * _WB
        out[...] = g.astype(np.float32)
    else:
        raise UnsupportedDtype(f"gray_from_rgb supports u8 and f32, got {src.dtype}")


def flip_horizontal(src: _PixelGrid, dst: _PixelGrid) -> None:
    """dst(y, x) = src(y, width-1-x), all channels."""
    if src.channels != dst.channels or src.dtype != dst.dtype:
        raise SizeMismatch(f"source {src!r} and destination {dst!r} differ in layout")
    _check_same_size(src, dst)
    _check_distinct(src, dst)
    np.copyto(dst.as_array(), src.as_array()[:, ::-1, :])


def _source_centers(dst_n: int, src_n: int) -> np.ndarray:
    scale = src_n / dst_n
    return (np.arange(dst_n, dtype=np.float64) + 0.5) * scale - 0.5


def _nearest_indices(dst_n: int, src_n: int) -> np.ndarray:
    # round-half-down of the center coordinate: ceil(c - 0.5) == ceil((x+0.5)*s) - 1
    scale = src_n / dst_n
    z = (np.arange(dst_n, dtype=np.float64) + 0.5) * scale
    idx = np.ceil(z).astype(np.int64) - 1
    return np.clip(idx, 0, src_n - 1)


def resize_nearest(src: _PixelGrid, dst: _PixelGrid) -> None:
    """Nearest-neighbor resize to the destination's pre-set dimensions."""
    if src.channels != dst.channels or src.dtype != dst.dtype:
        raise SizeMismatch(f"source {src!r} and destination {dst!r} differ in layout")
    _check_distinct(src, dst)
    a = src.as_array()
    xi = _nearest_indices(dst.width, src.width)
    yi = _nearest_indices(dst.height, src.height)
    np.copyto(dst.as_array(), a[yi[:, None], xi[None, :], :])


def resize_bilinear(src: _PixelGrid, dst: _PixelGrid) -> None:
    """Bilinear resize of f32 images with pixel-center mapping and edge clamp."""
    if src.dtype != np.float32 or dst.dtype != np.float32:
        raise UnsupportedDtype(f"resize_bilinear requires f32 images, got {src.dtype} -> {dst.dtype}")
    if src.channels != dst.channels:
        raise SizeMismatch(f"source has {src.channels} channels, destination {dst.channels}")
    _check_distinct(src, dst)
    a = src.as_array()

    sx = np.clip(_source_centers(dst.width, src.width), 0.0, src.width - 1.0)
    sy = np.clip(_source_centers(dst.height, src.height), 0.0, src.height - 1.0)
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    x1 = np.minimum(x0 + 1, src.width - 1)
    y1 = np.minimum(y0 + 1, src.height - 1)
    fx = (sx - x0).astype(np.float32)[None, :, None]
    fy = (sy - y0).astype(np.float32)[:, None, None]

    top = a[y0[:, None], x0[None, :], :] * (1 - fx) + a[y0[:, None], x1[None, :], :] * fx
    bot = a[y1[:, None], x0[None, :], :] * (1 - fx) + a[y1[:, None], x1[None, :], :] * fx
    out = dst.as_array()
    np.multiply(top, (1 - fy), out=top)
    np.multiply(bot, fy, out=bot)
    np.add(top, bot, out=out)


def sobel(src: _PixelGrid, dst: _PixelGrid, kernel_size: int) -> None:
    """Gradient magnitude sqrt(Gx^2 + Gy^2) per channel, replicate border.

    Gx correlates with [[-1,0,1],[-2,0,2],[-1,0,1]] and Gy with its
    transpose; the output is the unnormalized magnitude.
    """
    if kernel_size != 3:
        raise UnsupportedKernelSize(f"only kernel_size 3 is supported, got {kernel_size}")
    if src.dtype != np.float32 or dst.dtype != np.float32:
        raise UnsupportedDtype(f"sobel requires f32 images, got {src.dtype} -> {dst.dtype}")
    if src.channels != dst.channels:
        raise SizeMismatch(f"source has {src.channels} channels, destination {dst.channels}")
    _check_same_size(src, dst)
    _check_distinct(src, dst)

    p = np.pad(src.as_array(), ((1, 1), (1, 1), (0, 0)), mode="edge")
    # row/column differences shared by both gradients
    left, right = p[1:-1, :-2, :], p[1:-1, 2:, :]
    up, down = p[:-2, 1:-1, :], p[2:, 1:-1, :]
    ul, ur = p[:-2, :-2, :], p[:-2, 2:, :]
    dl, dr = p[2:, :-2, :], p[2:, 2:, :]

    gx = (ur - ul) + 2.0 * (right - left) + (dr - dl)
    gy = (dl - ul) + 2.0 * (down - up) + (dr - ur)

    out = dst.as_array()
    np.multiply(gx, gx, out=gx)
    np.multiply(gy, gy, out=gy)
    np.add(gx, gy, out=gx)
    np.sqrt(gx, out=out)
