"""Benchmark harness: warmed-up, wall-clock timing of the image operations.

Fixtures are seeded synthetic images allocated during setup; the timed loops
of the buffer-writing kernels run under a counting allocator and are verified
to allocate nothing, turning the preallocated-output discipline into a
runtime assertion rather than a convention.
"""
from __future__ import annotations

import csv
import io
import json
import platform
import sys
import time
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone

import numpy as np

from . import imgproc
from .errors import FixtureFailure, FoveaError, IoFailure, UnknownOp
from .image import GRAY8, RGB8, Image, ImageSize, ImageType
from .io import decode_jpeg, decode_png, encode_jpeg, encode_png
from .synth import seeded_f32_image, seeded_smooth_u8_image, seeded_u8_image
from .tensor import CountingAllocator

_F32_3 = ImageType(np.float32, 3)


@dataclass
class BenchReport:
    op: str
    width: int
    height: int
    iterations: int
    mean_ns: float
    median_ns: float
    p95_ns: float
    stddev_ns: float
    throughput_megapixels_per_s: float | None
    timestamp: str
    profile: str

    def __post_init__(self):
        if self.iterations < 1:
            raise FixtureFailure("iterations must be >= 1")
        if not (self.median_ns <= self.p95_ns and self.mean_ns > 0 and self.median_ns > 0):
            raise FixtureFailure("inconsistent timing aggregates")


def _build_profile() -> str:
    return f"{platform.python_implementation().lower()}-{platform.python_version()}-numpy-{np.__version__}"


# Each op: setup(size, alloc) -> (run callable, guard_allocations flag).
# Guarded ops write into preallocated buffers and must not allocate while timed.

def _setup_gray(size, alloc):
    src = seeded_u8_image(size.width, size.height, 3, seed=11, alloc=alloc)
    dst = GRAY8.from_size_val(size, 0, alloc=alloc)
    return lambda: imgproc.gray_from_rgb(src, dst), True


def _setup_flip(size, alloc):
    src = seeded_u8_image(size.width, size.height, 3, seed=12, alloc=alloc)
    dst = RGB8.from_size_val(size, 0, alloc=alloc)
    return lambda: imgproc.flip_horizontal(src, dst), True


def _setup_resize_nearest(size, alloc):
    src = seeded_u8_image(size.width, size.height, 3, seed=13, alloc=alloc)
    dst = RGB8.from_size_val(ImageSize(size.width * 2, size.height * 2), 0, alloc=alloc)
    return lambda: imgproc.resize_nearest(src, dst), True


def _setup_resize_bilinear(size, alloc):
    src = seeded_f32_image(size.width, size.height, 3, seed=14, alloc=alloc)
    dst = _F32_3.from_size_val(ImageSize(size.width * 2, size.height * 2), 0.0, alloc=alloc)
    return lambda: imgproc.resize_bilinear(src, dst), True


def _setup_sobel(size, alloc):
    src = seeded_f32_image(size.width, size.height, 3, seed=15, alloc=alloc)
    dst = _F32_3.from_size_val(size, 0.0, alloc=alloc)
    return lambda: imgproc.sobel(src, dst, 3), True


def _setup_decode_png(size, alloc):
    data = encode_png(seeded_u8_image(size.width, size.height, 3, seed=16))
    return lambda: decode_png(data), False


def _setup_decode_jpeg(size, alloc):
    data = encode_jpeg(seeded_smooth_u8_image(size.width, size.height, 3, seed=17), 90)
    return lambda: decode_jpeg(data), False


def _setup_encode_jpeg(size, alloc):
    img = seeded_smooth_u8_image(size.width, size.height, 3, seed=18)
    return lambda: encode_jpeg(img, 90), False


_OPS = {
    "gray_from_rgb": _setup_gray,
    "flip_horizontal": _setup_flip,
    "resize_nearest": _setup_resize_nearest,
    "resize_bilinear": _setup_resize_bilinear,
    "sobel": _setup_sobel,
    "decode_png": _setup_decode_png,
    "decode_jpeg": _setup_decode_jpeg,
    "encode_jpeg": _setup_encode_jpeg,
}

OP_NAMES = tuple(_OPS)


def run_benchmark(op: str, size: ImageSize, iterations: int, warmup: int = 5) -> BenchReport:
    """Time `iterations` runs of `op` on seeded fixtures at `size`, after
    `warmup` unrecorded runs."""
    if op not in _OPS:
        raise UnknownOp(f"unknown op {op!r}; expected one of {', '.join(OP_NAMES)}")
    if iterations < 1:
        raise FixtureFailure("iterations must be >= 1")
    if warmup < 0:
        raise FixtureFailure("warmup must be >= 0")

    alloc = CountingAllocator()
    try:
        run, guard = _OPS[op](size, alloc)
    except FoveaError:
        raise
    except Exception as e:
        raise FixtureFailure(f"cannot build fixture for {op} at {size.width}x{size.height}: {e}") from e

    for _ in range(warmup):
        run()

    acquires_before = alloc.acquire_count
    times = np.empty(iterations, dtype=np.int64)
    for i in range(iterations):
        t0 = time.perf_counter_ns()
        run()
        times[i] = time.perf_counter_ns() - t0
    if guard and alloc.acquire_count != acquires_before:
        raise FixtureFailure(
            f"{op} acquired {alloc.acquire_count - acquires_before} buffers during the timed loop"
        )

    total_s = float(times.sum()) / 1e9
    pixels = size.width * size.height * iterations
    return BenchReport(
        op=op,
        width=size.width,
        height=size.height,
        iterations=iterations,
        mean_ns=float(times.mean()),
        median_ns=float(np.median(times)),
        p95_ns=float(np.percentile(times, 95)),
        stddev_ns=float(times.std()),
        throughput_megapixels_per_s=pixels / total_s / 1e6,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        profile=_build_profile(),
    )


def render_report(reports: list[BenchReport], fmt: str = "json") -> str:
    """Serialize reports as a JSON array or a CSV table."""
    if fmt == "json":
        return json.dumps([asdict(r) for r in reports], indent=2)
    if fmt == "csv":
        names = [f.name for f in fields(BenchReport)]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        writer.writeheader()
        for r in reports:
            writer.writerow(asdict(r))
        return buf.getvalue()
    raise FoveaError(f"unknown report format {fmt!r}")


def emit_report(reports: list[BenchReport], fmt: str = "json", path=None) -> None:
    """Write rendered reports to `path`, or stdout when no path is given."""
    text = render_report(reports, fmt)
    if path is None:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))
        return
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + ("" if text.endswith("\n") else "\n"))
    except OSError as e:
        raise IoFailure(f"cannot write report to {path}: {e}") from e
