"""PNG encode/decode.

Container handling (signature, chunks, CRCs, scanline filters) is done here;
DEFLATE is delegated to zlib. Decode supports bit depths 8 and 16 for
grayscale/RGB/RGBA plus 8-bit palette images; interlaced files, sub-byte
depths, and alpha-via-tRNS are rejected as unsupported features. Encode
writes 8-bit images with filter type 0 on every row, which keeps the decode
path fully vectorized for round trips.
"""
from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import CorruptStream, UnsupportedPngFeature
from ..image import Image

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

_COLOR_CHANNELS = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}


def _chunk(kind: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + kind
        + payload
        + struct.pack(">I", zlib.crc32(kind + payload) & 0xFFFFFFFF)
    )


def encode_png(img: Image) -> bytes:
    """Lossless PNG stream for a u8 image with 1, 3, or 4 channels."""
    if img.dtype != np.uint8:
        raise UnsupportedPngFeature(f"encoder writes u8 images, got {img.dtype}")
    if img.channels not in (1, 3, 4):
        raise UnsupportedPngFeature(f"encoder supports 1/3/4 channels, got {img.channels}")
    color_type = {1: 0, 3: 2, 4: 6}[img.channels]
    h, w = img.height, img.width
    ihdr = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 0)

    arr = img.as_array()
    rows = np.zeros((h, 1 + w * img.channels), dtype=np.uint8)
    rows[:, 1:] = arr.reshape(h, w * img.channels)
    idat = zlib.compress(rows.tobytes(), 6)
    return PNG_SIGNATURE + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def _iter_chunks(data: bytes):
    pos = len(PNG_SIGNATURE)
    while pos < len(data):
        if pos + 8 > len(data):
            raise CorruptStream("truncated chunk header")
        (length,) = struct.unpack_from(">I", data, pos)
        kind = data[pos + 4 : pos + 8]
        if pos + 8 + length + 4 > len(data):
            raise CorruptStream(f"truncated {kind!r} chunk")
        payload = data[pos + 8 : pos + 8 + length]
        (crc,) = struct.unpack_from(">I", data, pos + 8 + length)
        if zlib.crc32(kind + payload) & 0xFFFFFFFF != crc:
            raise CorruptStream(f"bad CRC in {kind!r} chunk")
        yield kind, payload
        pos += 12 + length
        if kind == b"IEND":
            return
    raise CorruptStream("stream ends without IEND")


def _unfilter(raw: np.ndarray, h: int, stride: int, bpp: int) -> np.ndarray:
    """Reverse per-row scanline filters; returns (h, stride) u8 pixels."""
    out = np.zeros((h, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.uint8)
    for y in range(h):
        ftype = int(raw[y, 0])
        row = raw[y, 1:]
        if ftype == 0:
            out[y] = row
        elif ftype == 1:  # Sub: cumulative sum within each byte lane
            np.add.accumulate(row.reshape(-1, bpp), axis=0, dtype=np.uint8, out=out[y].reshape(-1, bpp))
        elif ftype == 2:  # Up
            np.add(row, prev, out=out[y], dtype=np.uint8, casting="unsafe")
        elif ftype == 3:  # Average: sequential in x
            cur = [0] * stride
            rw = row.tolist()
            pv = prev.tolist()
            for x in range(stride):
                left = cur[x - bpp] if x >= bpp else 0
                cur[x] = (rw[x] + ((left + pv[x]) >> 1)) & 0xFF
            out[y] = cur
        elif ftype == 4:  # Paeth: sequential in x
            cur = [0] * stride
            rw = row.tolist()
            pv = prev.tolist()
            for x in range(stride):
                a = cur[x - bpp] if x >= bpp else 0
                b = pv[x]
                c = pv[x - bpp] if x >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                if pa <= pb and pa <= pc:
                    pred = a
                elif pb <= pc:
                    pred = b
                else:
                    pred = c
                cur[x] = (rw[x] + pred) & 0xFF
            out[y] = cur
        else:
            raise CorruptStream(f"unknown filter type {ftype} in row {y}")
        prev = out[y]
    return out


def decode_png(data: bytes) -> Image:
    """Fully decoded interleaved image; 16-bit streams come back as u16."""
    if not data[: len(PNG_SIGNATURE)] == PNG_SIGNATURE:
        raise CorruptStream("not a PNG stream (bad signature)")

    width = height = None
    bit_depth = color_type = None
    palette: np.ndarray | None = None
    idat = bytearray()
    seen_ihdr = False

    for kind, payload in _iter_chunks(data):
        if kind == b"IHDR":
            if len(payload) != 13:
                raise CorruptStream(f"IHDR length {len(payload)}")
            width, height, bit_depth, color_type, compression, filt, interlace = struct.unpack(
                ">IIBBBBB", payload
            )
            if width == 0 or height == 0:
                raise CorruptStream(f"zero dimension {width}x{height}")
            if compression != 0 or filt != 0:
                raise CorruptStream("unknown compression/filter method")
            if interlace == 1:
                raise UnsupportedPngFeature("interlaced (Adam7) PNG is not supported")
            if interlace != 0:
                raise CorruptStream(f"bad interlace flag {interlace}")
            if color_type not in _COLOR_CHANNELS:
                raise CorruptStream(f"bad color type {color_type}")
            if color_type == 4:
                raise UnsupportedPngFeature("gray+alpha images are not supported")
            if bit_depth not in (8, 16) or (color_type == 3 and bit_depth != 8):
                raise UnsupportedPngFeature(f"bit depth {bit_depth} for color type {color_type}")
            seen_ihdr = True
        elif kind == b"PLTE":
            if len(payload) % 3 != 0 or len(payload) == 0:
                raise CorruptStream(f"PLTE length {len(payload)}")
            palette = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3)
        elif kind == b"tRNS":
            raise UnsupportedPngFeature("tRNS transparency is not supported")
        elif kind == b"IDAT":
            idat += payload
        # ancillary chunks are skipped

    if not seen_ihdr:
        raise CorruptStream("missing IHDR")
    if not idat:
        raise CorruptStream("missing IDAT")

    channels = _COLOR_CHANNELS[color_type]
    sample_bytes = bit_depth // 8
    bpp = channels * sample_bytes
    stride = width * bpp
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as e:
        raise CorruptStream(f"bad deflate stream: {e}") from None
    if len(raw) != height * (1 + stride):
        raise CorruptStream(f"decompressed {len(raw)} bytes, expected {height * (1 + stride)}")

    rows = np.frombuffer(raw, dtype=np.uint8).reshape(height, 1 + stride)
    filters_used = set(np.unique(rows[:, 0]).tolist())
    if filters_used <= {0}:
        pixels = rows[:, 1:].copy()
    else:
        pixels = _unfilter(rows, height, stride, bpp)

    if color_type == 3:
        if palette is None:
            raise CorruptStream("palette image without PLTE")
        idx = pixels.reshape(height, width)
        if int(idx.max(initial=0)) >= palette.shape[0]:
            raise CorruptStream("palette index out of range")
        return Image.from_array(palette[idx])

    if bit_depth == 16:
        arr = pixels.reshape(height, width, channels, 2)
        values = (arr[..., 0].astype(np.uint16) << 8) | arr[..., 1]
        return Image.from_array(values)
    return Image.from_array(pixels.reshape(height, width, channels))
