import numpy as np
import pytest

from fovea.image import Image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_u8_image(rng, w, h, c, alloc=None) -> Image:
    arr = rng.integers(0, 256, size=(h, w, c), dtype=np.uint8)
    return Image.from_array(arr, alloc=alloc)


def random_f32_image(rng, w, h, c, alloc=None) -> Image:
    arr = rng.random(size=(h, w, c), dtype=np.float32)
    return Image.from_array(arr, alloc=alloc)


def pytest_runtest_logreport(report):
    # One visible line per acceptance criterion at the end of its test.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\n[{outcome}] {name}")
