import numpy as np
import pytest

from fovea.errors import CorruptStream, UnknownFormat
from fovea.image import Image
from fovea.io import (
    EncodedImage,
    decode_image,
    encode_jpeg,
    encode_png,
    read_image_any,
    sniff_format,
    write_image_jpeg,
    write_image_png,
)


@pytest.fixture
def rgb(rng):
    return Image.from_array(rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8))


class TestSniff:
    def test_formats(self, rgb):
        assert sniff_format(encode_png(rgb)) == "png"
        assert sniff_format(encode_jpeg(rgb, 80)) == "jpeg"
        assert sniff_format(b"\x00\x01\x02\x03 nothing") == "unknown"

    def test_encoded_image_hint(self, rgb):
        enc = EncodedImage(encode_png(rgb))
        assert enc.format_hint == "png"
        with pytest.raises(CorruptStream):
            EncodedImage(b"")


class TestDispatch:
    def test_decode_image_png(self, rgb):
        img, fmt = decode_image(encode_png(rgb))
        assert fmt == "png"
        assert np.array_equal(img.as_array(), rgb.as_array())

    def test_decode_image_unknown(self):
        with pytest.raises(UnknownFormat):
            decode_image(b"garbage bytes here")

    def test_read_image_any_png(self, rgb, tmp_path):
        p = tmp_path / "img.png"
        write_image_png(p, rgb)
        img, fmt = read_image_any(p)
        assert fmt == "png" and np.array_equal(img.as_array(), rgb.as_array())

    def test_magic_wins_over_extension(self, rgb, tmp_path):
        p = tmp_path / "lies.png"  # JPEG bytes behind a .png name
        p.write_bytes(encode_jpeg(rgb, 85))
        img, fmt = read_image_any(p)
        assert fmt == "jpeg"
        assert img.channels == 3

    def test_read_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_image_any(tmp_path / "absent.png")

    def test_read_unknown_format(self, tmp_path):
        p = tmp_path / "data.bin"
        p.write_bytes(b"\x01\x02\x03\x04")
        with pytest.raises(UnknownFormat):
            read_image_any(p)

    def test_write_image_jpeg(self, rgb, tmp_path):
        p = tmp_path / "out.jpg"
        write_image_jpeg(p, rgb, quality=90)
        img, fmt = read_image_any(p)
        assert fmt == "jpeg" and img.width == rgb.width
