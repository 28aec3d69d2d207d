import gc

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fovea.errors import (
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
from fovea.tensor import (
    CountingAllocator,
    CpuAllocator,
    Tensor,
    elementwise_binary,
    row_major_strides,
)


class TestConstruction:
    def test_from_shape_slice_row_major(self):
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.float32)
        assert t.element_at((1, 0)) == 3
        assert t.strides == (2, 1)

    def test_from_shape_slice_empty(self):
        t = Tensor.from_shape_slice([0], [], dtype=np.uint8)
        assert t.numel == 0

    def test_from_shape_slice_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            Tensor.from_shape_slice([2, 3], [1, 2, 3, 4, 5], dtype=np.int32)

    def test_from_shape_slice_one_allocation(self):
        ca = CountingAllocator()
        Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.uint8, alloc=ca)
        assert ca.acquire_count == 1

    def test_from_shape_val(self):
        t = Tensor.from_shape_val([2, 2], 1.0, dtype=np.float32)
        assert t.tolist() == [[1.0, 1.0], [1.0, 1.0]]

    def test_from_shape_val_zero_vector(self):
        t = Tensor.from_shape_val([3], 0, dtype=np.int32)
        assert t.tolist() == [0, 0, 0]

    def test_constant_mean(self):
        assert Tensor.from_shape_val([2, 2], 7, dtype=np.int32).mean() == 7.0

    def test_unsupported_dtype(self):
        with pytest.raises(UnsupportedDtype):
            Tensor.from_shape_slice([1], [1], dtype=np.int64)

    def test_dtype_required_for_plain_sequences(self):
        with pytest.raises(UnsupportedDtype):
            Tensor.from_shape_slice([1], [1])

    @given(
        shape=st.lists(st.integers(1, 5), min_size=1, max_size=3),
        data=st.data(),
    )
    @settings(max_examples=50, deadline=None)
    def test_row_major_property(self, shape, data):
        n = int(np.prod(shape))
        values = data.draw(st.lists(st.integers(0, 255), min_size=n, max_size=n))
        t = Tensor.from_shape_slice(shape, values, dtype=np.uint8)
        strides = row_major_strides(shape)
        for _ in range(min(n, 10)):
            idx = tuple(data.draw(st.integers(0, e - 1)) for e in shape)
            off = sum(i * s for i, s in zip(idx, strides))
            assert t.element_at(idx) == values[off]


class TestElementAccess:
    def test_element_at(self):
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.int32)
        assert t.element_at((1, 1)) == 4
        assert t.element_at((0, 0)) == 1

    def test_element_out_of_bounds(self):
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.int32)
        with pytest.raises(IndexOutOfBounds):
            t.element_at((2, 0))
        with pytest.raises(IndexOutOfBounds):
            t.element_at((0, -1))


class TestViews:
    def test_reshape_round_trip(self):
        t = Tensor.from_shape_slice([4], [1, 2, 3, 4], dtype=np.uint8)
        assert t.reshape([2, 2]).reshape([4]).tolist() == [1, 2, 3, 4]

    def test_reshape_flatten_order(self):
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.uint8)
        assert t.reshape([4]).tolist() == [1, 2, 3, 4]

    def test_reshape_numel_mismatch(self):
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.uint8)
        with pytest.raises(NumelMismatch):
            t.reshape([3])

    def test_reshape_non_contiguous(self):
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.uint8)
        v = t.slice_view([(0, 2), (0, 1)])
        with pytest.raises(NonContiguous):
            v.reshape([2])

    def test_slice_view_values(self):
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.int32)
        v = t.slice_view([(1, 2), (0, 2)])
        assert v.tolist() == [[3, 4]]

    def test_slice_view_full_identity(self):
        t = Tensor.from_shape_slice([2, 3], list(range(6)), dtype=np.int32)
        v = t.slice_view([(0, 2), (0, 3)])
        assert v.tolist() == t.tolist()

    def test_slice_view_out_of_bounds(self):
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.int32)
        with pytest.raises(RangeOutOfBounds):
            t.slice_view([(0, 3), (0, 2)])

    def test_views_do_not_allocate(self):
        ca = CountingAllocator()
        t = Tensor.from_shape_slice([4, 4], list(range(16)), dtype=np.float64, alloc=ca)
        before = ca.acquire_count
        t.slice_view([(1, 3), (0, 4)])
        t.reshape([16])
        t.reshape([2, 8]).slice_view([(0, 1), (2, 6)])
        assert ca.acquire_count == before

    def test_view_survives_parent_drop(self):
        ca = CountingAllocator()
        t = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.int32, alloc=ca)
        v = t.slice_view([(0, 2), (0, 2)])
        del t
        gc.collect()
        assert ca.live_regions == 1
        assert v.element_at((1, 1)) == 4
        del v
        gc.collect()
        assert ca.live_regions == 0


class TestArithmetic:
    def test_sub_then_square_then_mean(self):
        x = Tensor.from_shape_slice([2, 2], [1, 2, 3, 4], dtype=np.float32)
        y = Tensor.from_shape_val([2, 2], 1.0, dtype=np.float32)
        assert x.sub(y).powf(2.0).mean() == 3.5

    def test_sub_self_is_zero(self):
        x = Tensor.from_shape_slice([3], [5, 6, 7], dtype=np.int32)
        assert x.sub(x).tolist() == [0, 0, 0]

    def test_shape_mismatch(self):
        a = Tensor.from_shape_val([2, 2], 0, dtype=np.int32)
        b = Tensor.from_shape_val([2, 3], 0, dtype=np.int32)
        with pytest.raises(ShapeMismatch):
            a.add(b)

    def test_integer_division_by_zero(self):
        a = Tensor.from_shape_slice([2], [4, 6], dtype=np.int32)
        b = Tensor.from_shape_slice([2], [2, 0], dtype=np.int32)
        with pytest.raises(DivisionByZero):
            a.div(b)

    def test_float_division_ieee(self):
        a = Tensor.from_shape_slice([2], [1.0, -1.0], dtype=np.float64)
        b = Tensor.from_shape_val([2], 0.0, dtype=np.float64)
        out = a.div(b).tolist()
        assert out[0] == np.inf and out[1] == -np.inf

    def test_powf_identity_and_zero(self):
        x = Tensor.from_shape_slice([4], [0.0, 1.0, 2.0, 3.0], dtype=np.float64)
        assert x.powf(1.0).tolist() == [0.0, 1.0, 2.0, 3.0]
        assert x.powf(0.0).tolist() == [1.0, 1.0, 1.0, 1.0]
        assert x.powf(2.0).tolist() == [0.0, 1.0, 4.0, 9.0]

    def test_powf_rejects_integers(self):
        with pytest.raises(UnsupportedDtype):
            Tensor.from_shape_val([2], 1, dtype=np.int32).powf(2.0)

    def test_mean_empty(self):
        with pytest.raises(EmptyTensor):
            Tensor.from_shape_slice([0], [], dtype=np.float32).mean()

    @pytest.mark.parametrize("dtype", [np.uint8, np.uint16, np.int32])
    def test_binary_matches_scalar_loop_integers(self, dtype, rng):
        info = np.iinfo(dtype)
        a = rng.integers(info.min, info.max, size=60, dtype=dtype)
        b = rng.integers(max(info.min, 1), info.max, size=60, dtype=dtype)
        ta = Tensor.from_shape_slice([60], a)
        tb = Tensor.from_shape_slice([60], b)
        for kind, op in [
            ("add", lambda x, y: (int(x) + int(y)) % (info.max + 1 - info.min)),
            ("sub", lambda x, y: (int(x) - int(y)) % (info.max + 1 - info.min)),
            ("mul", lambda x, y: (int(x) * int(y)) % (info.max + 1 - info.min)),
            ("div", lambda x, y: int(x) // int(y)),
        ]:
            got = elementwise_binary(ta, tb, kind).tolist()
            if dtype == np.int32 and kind in ("add", "sub", "mul"):
                expect = [
                    ((op(x, y) + 2**31) % 2**32) - 2**31 for x, y in zip(a.tolist(), b.tolist())
                ]
            else:
                expect = [op(x, y) for x, y in zip(a.tolist(), b.tolist())]
            assert got == expect, kind

    def test_binary_matches_scalar_loop_floats(self, rng):
        a = rng.random(100, dtype=np.float32)
        b = rng.random(100, dtype=np.float32) + np.float32(0.5)
        ta = Tensor.from_shape_slice([100], a)
        tb = Tensor.from_shape_slice([100], b)
        for kind, op in [("add", np.add), ("sub", np.subtract), ("mul", np.multiply), ("div", np.divide)]:
            got = np.asarray(elementwise_binary(ta, tb, kind).tolist(), dtype=np.float32)
            expect = np.array([op(np.float32(x), np.float32(y)) for x, y in zip(a, b)], dtype=np.float32)
            assert np.array_equal(got, expect), kind

    def test_result_is_single_allocation(self):
        ca = CountingAllocator()
        a = Tensor.from_shape_val([8], 3.0, dtype=np.float64, alloc=ca)
        b = Tensor.from_shape_val([8], 2.0, dtype=np.float64, alloc=ca)
        before = ca.acquire_count
        a.mul(b)
        assert ca.acquire_count == before + 1


class TestCast:
    def test_u8_to_f32(self):
        t = Tensor.from_shape_slice([2], [0, 255], dtype=np.uint8)
        assert t.cast(np.float32).tolist() == [0.0, 255.0]

    def test_float_to_u8_saturates(self):
        t = Tensor.from_shape_slice([2], [-3.0, 300.0], dtype=np.float32)
        assert t.cast(np.uint8).tolist() == [0, 255]

    def test_float_to_u8_rounds_half_away(self):
        t = Tensor.from_shape_slice([4], [1.5, 2.5, -0.5, 0.4], dtype=np.float32)
        assert t.cast(np.int32).tolist() == [2, 3, -1, 0]

    def test_int_to_int_saturates(self):
        t = Tensor.from_shape_slice([2], [300, 5], dtype=np.uint16)
        assert t.cast(np.uint8).tolist() == [255, 5]


class TestAllocatorInterchangeability:
    def test_same_results_on_both_allocators(self, rng):
        data = rng.random(24)
        results = []
        for alloc in (CpuAllocator(), CountingAllocator()):
            x = Tensor.from_shape_slice([4, 6], data, dtype=np.float64, alloc=alloc)
            y = Tensor.from_shape_val([4, 6], 0.25, dtype=np.float64, alloc=alloc)
            results.append(x.sub(y).powf(2.0).as_array().copy())
        assert np.array_equal(results[0], results[1])

    def test_live_region_accounting(self):
        ca = CountingAllocator()
        keep = Tensor.from_shape_val([4], 1, dtype=np.int32, alloc=ca)
        drop = Tensor.from_shape_val([4], 2, dtype=np.int32, alloc=ca)
        del drop
        gc.collect()
        assert ca.live_regions == 1
        del keep
        gc.collect()
        assert ca.live_regions == 0
