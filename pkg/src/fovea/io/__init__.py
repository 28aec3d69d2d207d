"""Image codec I/O: PNG and baseline JPEG, plus magic-byte dispatch.

Format detection always goes by leading bytes, never by file extension, so a
misnamed file decodes as what it actually is.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import CorruptStream, UnknownFormat
from ..image import Image
from .jpeg import decode_jpeg, encode_jpeg
from .png import PNG_SIGNATURE, decode_png, encode_png

_JPEG_MAGIC = b"\xff\xd8\xff"


def sniff_format(data: bytes) -> str:
    """'png', 'jpeg', or 'unknown' from the leading magic bytes."""
    if data[: len(PNG_SIGNATURE)] == PNG_SIGNATURE:
        return "png"
    if data[: len(_JPEG_MAGIC)] == _JPEG_MAGIC:
        return "jpeg"
    return "unknown"


@dataclass(frozen=True)
class EncodedImage:
    """An undecoded byte stream plus what its magic says it is."""

    data: bytes
    format_hint: str = "unknown"

    def __post_init__(self):
        if not self.data:
            raise CorruptStream("empty byte stream")
        object.__setattr__(self, "format_hint", sniff_format(self.data))


def decode_image(data: bytes) -> tuple[Image, str]:
    """Decode PNG or JPEG bytes; returns (image, format)."""
    fmt = sniff_format(data)
    if fmt == "png":
        return decode_png(data), "png"
    if fmt == "jpeg":
        return decode_jpeg(data), "jpeg"
    raise UnknownFormat("bytes are neither PNG nor JPEG")


def read_image_any(path) -> tuple[Image, str]:
    """Read and decode a PNG or JPEG file, dispatching on magic bytes."""
    with open(path, "rb") as f:
        data = f.read()
    try:
        return decode_image(data)
    except UnknownFormat:
        raise UnknownFormat(f"{path}: bytes are neither PNG nor JPEG") from None


def write_image_png(path, img: Image) -> None:
    with open(path, "wb") as f:
        f.write(encode_png(img))


def write_image_jpeg(path, img: Image, quality: int = 90) -> None:
    with open(path, "wb") as f:
        f.write(encode_jpeg(img, quality))


__all__ = [
    "EncodedImage",
    "sniff_format",
    "decode_image",
    "read_image_any",
    "decode_png",
    "encode_png",
    "decode_jpeg",
    "encode_jpeg",
    "write_image_png",
    "write_image_jpeg",
]
