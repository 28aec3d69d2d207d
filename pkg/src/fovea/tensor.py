"""Rank- and dtype-checked strided tensors with explicit, pluggable allocation.

The design center is predictability rather than convenience: a tensor is a
shape, element-unit strides, and a flat storage buffer obtained from an
:class:`Allocator`. Construction performs exactly one allocation, views
(`slice_view`, `reshape`) perform none, and every arithmetic operation states
how many buffers it creates. Rank and element type are fixed at construction
and validated at every boundary — the runtime analogue of carrying them in
the type.

Supported element types: u8, u16, i32, f32, f64.
"""
from __future__ import annotations

import weakref
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DivisionByZero,
    EmptyTensor,
    IndexOutOfBounds,
    LengthMismatch,
    NonContiguous,
    NumelMismatch,
    RangeOutOfBounds,
    ShapeMismatch,
    UnsupportedDtype,
)

SUPPORTED_DTYPES: tuple[np.dtype, ...] = tuple(
    np.dtype(t) for t in (np.uint8, np.uint16, np.int32, np.float32, np.float64)
)

_FLOAT_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))


def _as_dtype(dtype) -> np.dtype:
    dt = np.dtype(dtype)
    if dt not in SUPPORTED_DTYPES:
        raise UnsupportedDtype(
            f"dtype {dt} not supported; expected one of "
            f"{', '.join(str(d) for d in SUPPORTED_DTYPES)}"
        )
    return dt


def _check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(e) for e in shape)
    if any(e < 0 for e in shape):
        raise ShapeMismatch(f"negative extent in shape {shape}")
    return shape


def row_major_strides(shape: Sequence[int]) -> tuple[int, ...]:
    """Element-unit strides of a dense row-major layout for `shape`."""
    strides = [0] * len(shape)
    acc = 1
    for i in range(len(shape) - 1, -1, -1):
        strides[i] = acc
        acc *= shape[i]
    return tuple(strides)


def numel(shape: Sequence[int]) -> int:
    n = 1
    for e in shape:
        n *= e
    return n


class CpuAllocator:
    """Default allocator: one heap buffer per acquire, reclaimed by refcount.

    `release` is an accounting hook; actual memory is freed when the last
    tensor or view referencing the region drops it.
    """

    def acquire(self, nbytes: int) -> np.ndarray:
        return np.empty(int(nbytes), dtype=np.uint8)

    def release(self, region=None) -> None:
        pass


class CountingAllocator:
    """Wraps an allocator and counts acquires and releases.

    Delegates storage to the inner allocator, so tensors built on it are
    value-identical to plain CPU tensors. `live_regions` is the number of
    regions acquired and not yet released; releases fire automatically when
    the last reference to a region is dropped.
    """

    def __init__(self, inner=None):
        self.inner = inner if inner is not None else CpuAllocator()
        self.acquire_count = 0
        self.release_count = 0

    def acquire(self, nbytes: int) -> np.ndarray:
        region = self.inner.acquire(nbytes)
        self.acquire_count += 1
        weakref.finalize(region, self.release)
        return region

    def release(self, region=None) -> None:
        self.release_count += 1
        self.inner.release(region)

    @property
    def live_regions(self) -> int:
        return self.acquire_count - self.release_count


_DEFAULT_ALLOC = CpuAllocator()


class _Strided:
    """Shared machinery of owning tensors and zero-copy views."""

    __slots__ = ("_storage", "_shape", "_strides", "_offset", "_alloc")

    def _init(self, storage, shape, strides, offset, alloc):
        self._storage = storage
        self._shape = shape
        self._strides = strides
        self._offset = offset
        self._alloc = alloc

    # --- structure -----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self._shape

    @property
    def strides(self) -> tuple[int, ...]:
        """Per-dimension steps in element units (not bytes)."""
        return self._strides

    @property
    def rank(self) -> int:
        return len(self._shape)

    @property
    def dtype(self) -> np.dtype:
        return self._storage.dtype

    @property
    def numel(self) -> int:
        return numel(self._shape)

    @property
    def alloc(self):
        return self._alloc

    def is_contiguous(self) -> bool:
        return self._strides == row_major_strides(self._shape)

    def as_array(self) -> np.ndarray:
        """Zero-copy numpy view over this tensor's elements."""
        itemsize = self._storage.itemsize
        return np.lib.stride_tricks.as_strided(
            self._storage[self._offset:],
            shape=self._shape,
            strides=tuple(s * itemsize for s in self._strides),
        )

    # --- element access --------------------------------------------------

    def element_at(self, idx: Sequence[int]):
        """Element at `idx`, addressed as offset + sum(idx[i] * strides[i])."""
        if len(idx) != len(self._shape):
            raise IndexOutOfBounds(f"index {tuple(idx)} has wrong rank for shape {self._shape}")
        off = self._offset
        for i, (j, e, s) in enumerate(zip(idx, self._shape, self._strides)):
            j = int(j)
            if j < 0 or j >= e:
                raise IndexOutOfBounds(f"index {tuple(idx)} out of bounds for shape {self._shape} (dim {i})")
            off += j * s
        return self._storage[off].item()

    # --- views -----------------------------------------------------------

    def slice_view(self, ranges: Sequence[tuple[int, int]]) -> "TensorView":
        """Zero-copy sub-tensor over half-open ranges, one per dimension."""
        if len(ranges) != len(self._shape):
            raise RangeOutOfBounds(f"{len(ranges)} ranges for rank-{len(self._shape)} tensor")
        new_shape = []
        offset = self._offset
        for (start, stop), extent, stride in zip(ranges, self._shape, self._strides):
            start, stop = int(start), int(stop)
            if start < 0 or stop > extent or start > stop:
                raise RangeOutOfBounds(f"range {start}..{stop} out of bounds for extent {extent}")
            new_shape.append(stop - start)
            offset += start * stride
        return TensorView(self._storage, tuple(new_shape), self._strides, offset, self._alloc)

    def reshape(self, new_shape: Sequence[int]) -> "TensorView":
        """Zero-copy reinterpretation of contiguous storage under a new shape."""
        new_shape = _check_shape(new_shape)
        if numel(new_shape) != self.numel:
            raise NumelMismatch(f"cannot reshape {self._shape} ({self.numel} elements) to {new_shape}")
        if not self.is_contiguous():
            raise NonContiguous("reshape requires contiguous row-major storage; copy explicitly first")
        return TensorView(self._storage, new_shape, row_major_strides(new_shape), self._offset, self._alloc)

    # --- arithmetic (each returns one freshly allocated tensor) -----------

    def _binary(self, other: "_Strided", kind: str) -> "Tensor":
        if not isinstance(other, _Strided):
            raise TypeError(f"expected a tensor operand, got {type(other).__name__}")
        if self._shape != other._shape:
            raise ShapeMismatch(f"operand shapes differ: {self._shape} vs {other._shape}")
        if self.dtype != other.dtype:
            raise UnsupportedDtype(f"operand dtypes differ: {self.dtype} vs {other.dtype}")
        out = Tensor._allocate(self._shape, self.dtype, self._alloc)
        a, b = self.as_array(), other.as_array()
        if kind == "add":
            np.add(a, b, out=out.as_array())
        elif kind == "sub":
            np.subtract(a, b, out=out.as_array())
        elif kind == "mul":
            np.multiply(a, b, out=out.as_array())
        elif kind == "div":
            if self.dtype in _FLOAT_DTYPES:
                with np.errstate(divide="ignore", invalid="ignore"):
                    np.divide(a, b, out=out.as_array())
            else:
                if b.size and np.any(b == 0):
                    raise DivisionByZero("integer division with zero divisor element")
                np.floor_divide(a, b, out=out.as_array())
        else:
            raise ValueError(f"unknown binary op {kind!r}")
        return out

    def add(self, other: "_Strided") -> "Tensor":
        return self._binary(other, "add")

    def sub(self, other: "_Strided") -> "Tensor":
        return self._binary(other, "sub")

    def mul(self, other: "_Strided") -> "Tensor":
        return self._binary(other, "mul")

    def div(self, other: "_Strided") -> "Tensor":
        """Element-wise division; integer dtypes use floor division."""
        return self._binary(other, "div")

    def powf(self, exponent: float) -> "Tensor":
        """Element-wise power for float tensors; IEEE semantics (0**0 == 1)."""
        if self.dtype not in _FLOAT_DTYPES:
            raise UnsupportedDtype(f"powf requires a float tensor, got {self.dtype}")
        out = Tensor._allocate(self._shape, self.dtype, self._alloc)
        np.power(self.as_array(), self.dtype.type(exponent), out=out.as_array())
        return out

    def mean(self) -> float:
        """Arithmetic mean of all elements, accumulated in f64."""
        if self.numel == 0:
            raise EmptyTensor("mean of an empty tensor")
        return float(np.mean(self.as_array(), dtype=np.float64))

    def cast(self, dtype) -> "Tensor":
        """Numeric conversion. Float to integer rounds half away from zero,
        then clamps to the target range; NaN maps to 0."""
        dt = _as_dtype(dtype)
        out = Tensor._allocate(self._shape, dt, self._alloc)
        src = self.as_array()
        dst = out.as_array()
        if self.dtype in _FLOAT_DTYPES and dt not in _FLOAT_DTYPES:
            rounded = np.where(src >= 0, np.floor(src + 0.5), np.ceil(src - 0.5))
            rounded = np.nan_to_num(rounded, nan=0.0, posinf=float(np.iinfo(dt).max), neginf=float(np.iinfo(dt).min))
            np.clip(rounded, np.iinfo(dt).min, np.iinfo(dt).max, out=rounded)
            dst[...] = rounded.astype(dt)
        elif self.dtype not in _FLOAT_DTYPES and dt not in _FLOAT_DTYPES:
            clipped = np.clip(src, np.iinfo(dt).min, np.iinfo(dt).max)
            dst[...] = clipped.astype(dt)
        else:
            dst[...] = src.astype(dt)
        return out

    def copy(self) -> "Tensor":
        """Dense row-major copy (one allocation)."""
        out = Tensor._allocate(self._shape, self.dtype, self._alloc)
        np.copyto(out.as_array(), self.as_array())
        return out

    def tolist(self):
        return self.as_array().tolist()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(shape={self._shape}, dtype={self.dtype})"


class Tensor(_Strided):
    """Owning rank-N tensor over allocator-managed contiguous storage."""

    __slots__ = ()

    def __init__(self, *args, **kwargs):
        raise TypeError("use Tensor.from_shape_slice / Tensor.from_shape_val")

    @classmethod
    def _allocate(cls, shape, dtype, alloc) -> "Tensor":
        shape = _check_shape(shape)
        dt = _as_dtype(dtype)
        alloc = alloc if alloc is not None else _DEFAULT_ALLOC
        region = alloc.acquire(numel(shape) * dt.itemsize)
        t = cls.__new__(cls)
        t._init(region.view(dt), shape, row_major_strides(shape), 0, alloc)
        return t

    @classmethod
    def from_shape_slice(cls, shape: Sequence[int], data, dtype=None, alloc=None) -> "Tensor":
        """Row-major tensor from a flat sequence; exactly one allocation.

        `dtype` defaults to the dtype of `data` when it is a numpy array and
        must be given explicitly for plain sequences.
        """
        shape = _check_shape(shape)
        if dtype is None:
            if isinstance(data, np.ndarray):
                dtype = data.dtype
            else:
                raise UnsupportedDtype("dtype must be given when data is not a numpy array")
        dt = _as_dtype(dtype)
        flat = np.asarray(data, dtype=dt).reshape(-1)
        if flat.size != numel(shape):
            raise LengthMismatch(f"{flat.size} elements for shape {shape} (expected {numel(shape)})")
        t = cls._allocate(shape, dt, alloc)
        np.copyto(t._storage, flat)
        return t

    @classmethod
    def from_shape_val(cls, shape: Sequence[int], value, dtype=None, alloc=None) -> "Tensor":
        """Constant-filled tensor; exactly one allocation.

        Without an explicit `dtype`, a float `value` makes an f64 tensor and
        an int `value` an i32 tensor.
        """
        if dtype is None:
            dtype = np.float64 if isinstance(value, float) else np.int32
        t = cls._allocate(shape, dtype, alloc)
        t._storage[...] = value
        return t


class TensorView(_Strided):
    """Zero-copy window into another tensor's storage.

    Holds a reference to the parent storage, so the region outlives the view;
    reading through a view after the parent tensor is dropped stays valid.
    """

    __slots__ = ()

    def __init__(self, storage, shape, strides, offset, alloc):
        self._init(storage, shape, strides, offset, alloc)


def elementwise_binary(a: _Strided, b: _Strided, kind: str) -> Tensor:
    """Functional entry point for add/sub/mul/div."""
    return a._binary(b, kind)
