"""Baseline JPEG (JFIF) encode/decode.

The encoder writes sequential baseline streams: level shift, 8x8 DCT,
quantization with the standard tables scaled by the usual quality curve,
zigzag, and Huffman coding with the standard tables. No chroma subsampling
on encode (4:4:4), which keeps the quality loss to quantization alone.

The decoder handles baseline and extended-sequential Huffman streams with
sampling factors up to 2x2 (4:4:4, 4:2:2, 4:4:0, 4:2:0), restart markers,
and 8- or 16-bit quantization tables. Chroma upsampling is the centered
bilinear (triangle) filter. Progressive and arithmetic-coded streams are
rejected as unsupported features.

DCT/IDCT run on the exact orthonormal 8-point basis in float64, so repeated
decodes are bit-identical.
"""
from __future__ import annotations

import struct

import numpy as np

from ..errors import CorruptStream, InvalidQuality, UnsupportedJpegFeature
from ..image import Image

# --- constants ---------------------------------------------------------------

_QUANT_LUMA = np.array([
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
], dtype=np.int32).reshape(8, 8)

_QUANT_CHROMA = np.array([
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
], dtype=np.int32).reshape(8, 8)

_ZIGZAG = np.array([
    0, 1, 8, 16, 9, 2, 3, 10,
    17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
], dtype=np.int64)

_UNZIGZAG = np.argsort(_ZIGZAG)

# standard Huffman specs: (BITS[1..16], values)
_DC_LUMA_SPEC = (
    [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
    list(range(12)),
)
_DC_CHROMA_SPEC = (
    [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
    list(range(12)),
)
_AC_LUMA_SPEC = (
    [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D],
    [
        0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12,
        0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
        0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
        0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
        0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16,
        0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
        0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
        0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
        0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
        0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
        0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79,
        0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
        0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98,
        0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
        0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
        0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
        0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4,
        0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
        0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA,
        0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
        0xF9, 0xFA,
    ],
)
_AC_CHROMA_SPEC = (
    [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77],
    [
        0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21,
        0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
        0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
        0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0,
        0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34,
        0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
        0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38,
        0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
        0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
        0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
        0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78,
        0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
        0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96,
        0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
        0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
        0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
        0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2,
        0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
        0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9,
        0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
        0xF9, 0xFA,
    ],
)


def _dct_matrix() -> np.ndarray:
    k = np.arange(8)[:, None]
    n = np.arange(8)[None, :]
    m = np.cos((2 * n + 1) * k * np.pi / 16.0)
    m[0] *= np.sqrt(1.0 / 8.0)
    m[1:] *= np.sqrt(2.0 / 8.0)
    return m


_DCT_M = _dct_matrix()


def _blocks_dct(blocks: np.ndarray) -> np.ndarray:
    return np.einsum("ij,njk,lk->nil", _DCT_M, blocks, _DCT_M, optimize=True)


# fixed-point IDCT constants, 13 fraction bits
_CB = 13
_P1 = 2
_F_0_298631336 = 2446
_F_0_390180644 = 3196
_F_0_541196100 = 4433
_F_0_765366865 = 6270
_F_0_899976223 = 7373
_F_1_175875602 = 9633
_F_1_501321110 = 12299
_F_1_847759065 = 15137
_F_1_961570560 = 16069
_F_2_053119869 = 16819
_F_2_562915447 = 20995
_F_3_072711026 = 25172


def _descale(x: np.ndarray, n: int) -> np.ndarray:
    return (x + (1 << (n - 1))) >> n


def _idct_butterfly(s0, s1, s2, s3, s4, s5, s6, s7):
    """Shared even/odd part of the scaled-integer IDCT; returns the eight
    un-descaled outputs in index order."""
    z1 = (s2 + s6) * _F_0_541196100
    tmp2 = z1 - s6 * _F_1_847759065
    tmp3 = z1 + s2 * _F_0_765366865
    tmp0 = (s0 + s4) << _CB
    tmp1 = (s0 - s4) << _CB
    t10, t13 = tmp0 + tmp3, tmp0 - tmp3
    t11, t12 = tmp1 + tmp2, tmp1 - tmp2

    z1 = s7 + s1
    z2 = s5 + s3
    z3 = s7 + s3
    z4 = s5 + s1
    z5 = (z3 + z4) * _F_1_175875602
    o0 = s7 * _F_0_298631336
    o1 = s5 * _F_2_053119869
    o2 = s3 * _F_3_072711026
    o3 = s1 * _F_1_501321110
    z1 = z1 * -_F_0_899976223
    z2 = z2 * -_F_2_562915447
    z3 = z3 * -_F_1_961570560 + z5
    z4 = z4 * -_F_0_390180644 + z5
    o0 += z1 + z3
    o1 += z2 + z4
    o2 += z2 + z3
    o3 += z1 + z4
    return (t10 + o3, t11 + o2, t12 + o1, t13 + o0, t13 - o0, t12 - o1, t11 - o2, t10 - o3)


def _idct_islow(blocks: np.ndarray) -> np.ndarray:
    """Scaled-integer IDCT matching the common reference decoder's fixed-point
    arithmetic exactly; input (n, 8, 8) dequantized int64, output clamped u8
    samples as (n, 8, 8) int32 including the +128 level shift."""
    c = blocks
    cols = _idct_butterfly(*(c[:, k, :] for k in range(8)))
    ws = np.stack([_descale(v, _CB - _P1) for v in cols], axis=1)  # (n, 8, 8)
    rows = _idct_butterfly(*(ws[:, :, k] for k in range(8)))
    out = np.stack([_descale(v, _CB + _P1 + 3) + 128 for v in rows], axis=2)
    return np.clip(out, 0, 255).astype(np.int32)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


def _scaled_qtable(base: np.ndarray, quality: int) -> np.ndarray:
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    tbl = (base * scale + 50) // 100
    return np.clip(tbl, 1, 255).astype(np.int32)


def _rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    r = rgb[:, :, 0].astype(np.float64)
    g = rgb[:, :, 1].astype(np.float64)
    b = rgb[:, :, 2].astype(np.float64)
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b + 128.0
    cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b + 128.0
    return np.stack([y, cb, cr], axis=2)


def _ycbcr_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    """Integer YCbCr -> RGB using the same 16-bit fixed-point constants and
    rounding as the common reference decoder, so outputs agree exactly."""
    x_cb = cb - 128
    x_cr = cr - 128
    r = y + ((91881 * x_cr + 32768) >> 16)
    g = y + ((-22554 * x_cb + 32768 - 46802 * x_cr) >> 16)
    b = y + ((116130 * x_cb + 32768) >> 16)
    rgb = np.stack([r, g, b], axis=2)
    return np.clip(rgb, 0, 255).astype(np.uint8)


def _plane_to_blocks(plane: np.ndarray) -> np.ndarray:
    """Pad a 2-D plane to multiples of 8 by edge replication and tile it
    into raster-ordered 8x8 blocks."""
    h, w = plane.shape
    ph = (h + 7) // 8 * 8
    pw = (w + 7) // 8 * 8
    padded = np.pad(plane, ((0, ph - h), (0, pw - w)), mode="edge")
    return (
        padded.reshape(ph // 8, 8, pw // 8, 8).transpose(0, 2, 1, 3).reshape(-1, 8, 8),
        ph // 8,
        pw // 8,
    )


# --- Huffman machinery --------------------------------------------------------


def _canonical_codes(bits: list[int], values: list[int]) -> dict[int, tuple[int, int]]:
    """value -> (code, length)."""
    out = {}
    code = 0
    idx = 0
    for length in range(1, 17):
        for _ in range(bits[length - 1]):
            out[values[idx]] = (code, length)
            idx += 1
            code += 1
        code <<= 1
    return out


class _HuffDecoder:
    """Canonical Huffman decoder with an 8-bit fast lookup table."""

    __slots__ = ("lut", "mincode", "maxcode", "valptr", "values")

    def __init__(self, bits: list[int], values: list[int]):
        if sum(bits) != len(values):
            raise CorruptStream("Huffman table size mismatch")
        self.values = values
        self.lut = [None] * 256
        code = 0
        idx = 0
        self.mincode = [0] * 17
        self.maxcode = [-1] * 17
        self.valptr = [0] * 17
        for length in range(1, 17):
            if bits[length - 1]:
                self.valptr[length] = idx
                self.mincode[length] = code
                for _ in range(bits[length - 1]):
                    if length <= 8:
                        lo = code << (8 - length)
                        for j in range(lo, lo + (1 << (8 - length))):
                            self.lut[j] = (values[idx], length)
                    idx += 1
                    code += 1
                self.maxcode[length] = code - 1
            code <<= 1


def _decode_huff_slow(data, n, pos, buf, nbits, padded, table):
    """Decode a Huffman code longer than 8 bits, bit by bit.

    The leading 8 bits are already in `buf`'s top window. Returns
    (value, pos, buf, nbits, padded).
    """
    code = (buf >> (nbits - 8)) & 0xFF
    nbits -= 8
    buf &= (1 << nbits) - 1
    maxcode, mincode, valptr, values = table.maxcode, table.mincode, table.valptr, table.values
    for length in range(9, 17):
        if nbits < 1:
            if pos < n:
                buf = (buf << 8) | data[pos]
                pos += 1
            else:
                buf <<= 8
                padded += 1
            nbits += 8
        code = (code << 1) | ((buf >> (nbits - 1)) & 1)
        nbits -= 1
        buf &= (1 << nbits) - 1
        if maxcode[length] >= 0 and code <= maxcode[length]:
            return values[valptr[length] + code - mincode[length]], pos, buf, nbits, padded
    raise CorruptStream("invalid Huffman code")


def _decode_block(data, n, pos, buf, nbits, padded, pred, dc_table, ac_table, block):
    """Entropy-decode one 8x8 block into `block` (zigzag order).

    Bit-reader state lives in locals for speed; the segment is padded with
    zero bits past its end, and the caller detects over-consumption through
    `padded`. Returns (pos, buf, nbits, padded, pred).
    """
    lut = dc_table.lut
    while nbits < 8:
        if pos < n:
            buf = (buf << 8) | data[pos]
            pos += 1
        else:
            buf <<= 8
            padded += 1
        nbits += 8
    hit = lut[(buf >> (nbits - 8)) & 0xFF]
    if hit is not None:
        size, length = hit
        nbits -= length
        buf &= (1 << nbits) - 1
    else:
        size, pos, buf, nbits, padded = _decode_huff_slow(data, n, pos, buf, nbits, padded, dc_table)
    if size:
        if size > 11:
            raise CorruptStream(f"bad DC size {size}")
        while nbits < size:
            if pos < n:
                buf = (buf << 8) | data[pos]
                pos += 1
            else:
                buf <<= 8
                padded += 1
            nbits += 8
        v = (buf >> (nbits - size)) & ((1 << size) - 1)
        nbits -= size
        buf &= (1 << nbits) - 1
        pred += v - (1 << size) + 1 if v < (1 << (size - 1)) else v
    block[0] = pred

    lut = ac_table.lut
    k = 1
    while k < 64:
        while nbits < 8:
            if pos < n:
                buf = (buf << 8) | data[pos]
                pos += 1
            else:
                buf <<= 8
                padded += 1
            nbits += 8
        hit = lut[(buf >> (nbits - 8)) & 0xFF]
        if hit is not None:
            rs, length = hit
            nbits -= length
            buf &= (1 << nbits) - 1
        else:
            rs, pos, buf, nbits, padded = _decode_huff_slow(data, n, pos, buf, nbits, padded, ac_table)
        size = rs & 15
        if size == 0:
            if rs == 0xF0:  # ZRL: sixteen zeros
                k += 16
                continue
            break  # EOB
        k += rs >> 4
        if k > 63:
            raise CorruptStream("AC run past end of block")
        while nbits < size:
            if pos < n:
                buf = (buf << 8) | data[pos]
                pos += 1
            else:
                buf <<= 8
                padded += 1
            nbits += 8
        v = (buf >> (nbits - size)) & ((1 << size) - 1)
        nbits -= size
        buf &= (1 << nbits) - 1
        block[k] = v - (1 << size) + 1 if v < (1 << (size - 1)) else v
        k += 1
    return pos, buf, nbits, padded, pred


# --- encoder -------------------------------------------------------------------


class _BitWriter:
    __slots__ = ("out", "buf", "nbits")

    def __init__(self):
        self.out = bytearray()
        self.buf = 0
        self.nbits = 0

    def write(self, code: int, length: int) -> None:
        self.buf = (self.buf << length) | code
        self.nbits += length
        while self.nbits >= 8:
            self.nbits -= 8
            byte = (self.buf >> self.nbits) & 0xFF
            self.out.append(byte)
            if byte == 0xFF:
                self.out.append(0x00)
        self.buf &= (1 << self.nbits) - 1

    def flush(self) -> None:
        if self.nbits:
            pad = 8 - self.nbits
            self.write((1 << pad) - 1, pad)


def _encode_block(
    writer: _BitWriter,
    zz: list[int],
    pred: int,
    dc_codes: dict,
    ac_codes: dict,
) -> int:
    dc = zz[0]
    diff = dc - pred
    size = abs(diff).bit_length()
    code, length = dc_codes[size]
    writer.write(code, length)
    if size:
        writer.write(diff if diff >= 0 else diff + (1 << size) - 1, size)

    run = 0
    last_nz = 0
    for k in range(63, 0, -1):
        if zz[k]:
            last_nz = k
            break
    for k in range(1, last_nz + 1):
        v = zz[k]
        if v == 0:
            run += 1
            continue
        while run > 15:
            code, length = ac_codes[0xF0]  # ZRL
            writer.write(code, length)
            run -= 16
        size = abs(v).bit_length()
        code, length = ac_codes[(run << 4) | size]
        writer.write(code, length)
        writer.write(v if v >= 0 else v + (1 << size) - 1, size)
        run = 0
    if last_nz != 63:
        code, length = ac_codes[0x00]  # EOB
        writer.write(code, length)
    return dc


def _marker(tag: int, payload: bytes) -> bytes:
    return struct.pack(">HH", tag, len(payload) + 2) + payload


def _dht_payload(tclass: int, tid: int, spec) -> bytes:
    bits, values = spec
    return bytes([(tclass << 4) | tid]) + bytes(bits) + bytes(values)


def encode_jpeg(img: Image, quality: int = 90) -> bytes:
    """Baseline JFIF stream for a u8 image with 1 (gray) or 3 (RGB) channels."""
    if not isinstance(quality, int) or not 1 <= quality <= 100:
        raise InvalidQuality(f"quality must be in 1..=100, got {quality!r}")
    if img.dtype != np.uint8:
        raise UnsupportedJpegFeature(f"encoder writes u8 images, got {img.dtype}")
    if img.channels not in (1, 3):
        raise UnsupportedJpegFeature(f"encoder supports 1 or 3 channels, got {img.channels}")

    h, w = img.height, img.width
    arr = img.as_array()
    if img.channels == 3:
        planes = [p for p in np.moveaxis(_rgb_to_ycbcr(arr), 2, 0)]
    else:
        planes = [arr[:, :, 0].astype(np.float64)]

    qtables = [_scaled_qtable(_QUANT_LUMA, quality)]
    if img.channels == 3:
        qtables.append(_scaled_qtable(_QUANT_CHROMA, quality))

    # quantized zigzag coefficients per component
    comp_coeffs = []
    blocks_wide = blocks_high = None
    for ci, plane in enumerate(planes):
        blocks, bh, bw = _plane_to_blocks(plane)
        blocks_high, blocks_wide = bh, bw
        freq = _blocks_dct(blocks - 128.0)
        q = qtables[min(ci, len(qtables) - 1)].astype(np.float64)
        quantized = _round_half_away(freq / q).astype(np.int64)
        comp_coeffs.append(quantized.reshape(-1, 64)[:, _ZIGZAG].tolist())

    out = bytearray()
    out += b"\xff\xd8"  # SOI
    out += _marker(0xFFE0, b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00")
    for tid, tbl in enumerate(qtables):
        zz = tbl.reshape(-1)[_ZIGZAG].astype(np.uint8)
        out += _marker(0xFFDB, bytes([tid]) + zz.tobytes())

    ncomp = img.channels
    sof = struct.pack(">BHHB", 8, h, w, ncomp)
    for ci in range(ncomp):
        sof += bytes([ci + 1, 0x11, min(ci, len(qtables) - 1)])
    out += _marker(0xFFC0, sof)

    out += _marker(0xFFC4, _dht_payload(0, 0, _DC_LUMA_SPEC))
    out += _marker(0xFFC4, _dht_payload(1, 0, _AC_LUMA_SPEC))
    if ncomp == 3:
        out += _marker(0xFFC4, _dht_payload(0, 1, _DC_CHROMA_SPEC))
        out += _marker(0xFFC4, _dht_payload(1, 1, _AC_CHROMA_SPEC))

    sos = bytes([ncomp])
    for ci in range(ncomp):
        tid = min(ci, 1)
        sos += bytes([ci + 1, (tid << 4) | tid])
    sos += bytes([0, 63, 0])
    out += _marker(0xFFDA, sos)

    dc_luma = _canonical_codes(*_DC_LUMA_SPEC)
    ac_luma = _canonical_codes(*_AC_LUMA_SPEC)
    dc_chroma = _canonical_codes(*_DC_CHROMA_SPEC)
    ac_chroma = _canonical_codes(*_AC_CHROMA_SPEC)
    code_tables = [(dc_luma, ac_luma)] + [(dc_chroma, ac_chroma)] * (ncomp - 1)

    writer = _BitWriter()
    preds = [0] * ncomp
    for b in range(blocks_high * blocks_wide):
        for ci in range(ncomp):
            preds[ci] = _encode_block(writer, comp_coeffs[ci][b], preds[ci], *code_tables[ci])
    writer.flush()
    out += writer.out
    out += b"\xff\xd9"  # EOI
    return bytes(out)


# --- decoder ---------------------------------------------------------------------


class _Component:
    __slots__ = ("cid", "h", "v", "tq", "dc_table", "ac_table", "blocks", "bw", "bh", "pred")

    def __init__(self, cid, h, v, tq):
        self.cid = cid
        self.h = h
        self.v = v
        self.tq = tq


def _split_scan(data: bytes, start: int) -> tuple[list[bytes], int]:
    """Entropy-coded segments (unstuffed, split at restart markers) plus the
    offset of the terminating marker."""
    segments = []
    cur = bytearray()
    i = start
    n = len(data)
    while i < n:
        byte = data[i]
        if byte != 0xFF:
            cur.append(byte)
            i += 1
            continue
        if i + 1 >= n:
            raise CorruptStream("scan ends mid-marker")
        nxt = data[i + 1]
        if nxt == 0x00:
            cur.append(0xFF)
            i += 2
        elif 0xD0 <= nxt <= 0xD7:  # restart
            segments.append(bytes(cur))
            cur = bytearray()
            i += 2
        elif nxt == 0xFF:
            i += 1  # fill byte
        else:
            segments.append(bytes(cur))
            return segments, i
    raise CorruptStream("scan ends without a terminating marker")


def decode_jpeg(data: bytes) -> Image:
    """Decoded u8 image: 3 channels for YCbCr streams, 1 for grayscale."""
    if len(data) < 4 or data[0] != 0xFF or data[1] != 0xD8:
        raise CorruptStream("not a JPEG stream (bad SOI)")

    qtables: dict[int, np.ndarray] = {}
    dc_tables: dict[int, _HuffDecoder] = {}
    ac_tables: dict[int, _HuffDecoder] = {}
    components: list[_Component] = []
    height = width = None
    restart_interval = 0
    i = 2
    n = len(data)

    def need(k: int) -> None:
        if i + k > n:
            raise CorruptStream("truncated stream")

    scan_segments = None
    while True:
        if i + 2 > n:
            raise CorruptStream("stream ends without EOI")
        if data[i] != 0xFF:
            raise CorruptStream(f"expected marker at offset {i}")
        marker = data[i + 1]
        i += 2
        if marker == 0xD9:  # EOI
            raise CorruptStream("EOI before scan data")
        if marker == 0x01 or 0xD0 <= marker <= 0xD7:
            continue  # standalone markers
        need(2)
        (seg_len,) = struct.unpack_from(">H", data, i)
        if seg_len < 2:
            raise CorruptStream("bad segment length")
        need(seg_len)
        payload = data[i + 2 : i + seg_len]
        i += seg_len

        if marker == 0xDB:  # DQT
            p = 0
            while p < len(payload):
                pq, tq = payload[p] >> 4, payload[p] & 0xF
                p += 1
                if pq not in (0, 1):
                    raise CorruptStream(f"bad DQT precision {pq}")
                count = 64 * (2 if pq else 1)
                if p + count > len(payload):
                    raise CorruptStream("truncated DQT")
                if pq:
                    vals = np.frombuffer(payload, dtype=">u2", count=64, offset=p).astype(np.int32)
                else:
                    vals = np.frombuffer(payload, dtype=np.uint8, count=64, offset=p).astype(np.int32)
                table = np.zeros(64, dtype=np.int32)
                table[_ZIGZAG] = vals
                qtables[tq] = table.reshape(8, 8)
                p += count
        elif marker in (0xC0, 0xC1):  # SOF0/1: (extended) sequential, Huffman
            if len(payload) < 6:
                raise CorruptStream("truncated SOF")
            precision, height, width, ncomp = struct.unpack_from(">BHHB", payload, 0)
            if precision != 8:
                raise UnsupportedJpegFeature(f"sample precision {precision}")
            if height == 0 or width == 0:
                raise CorruptStream("zero dimension")
            if ncomp not in (1, 3):
                raise UnsupportedJpegFeature(f"{ncomp} components")
            if len(payload) != 6 + 3 * ncomp:
                raise CorruptStream("bad SOF length")
            components = []
            for c in range(ncomp):
                cid, hv, tq = payload[6 + 3 * c : 9 + 3 * c]
                comp = _Component(cid, hv >> 4, hv & 0xF, tq)
                if comp.h not in (1, 2) or comp.v not in (1, 2):
                    raise UnsupportedJpegFeature(f"sampling factors {comp.h}x{comp.v}")
                components.append(comp)
            if ncomp == 1:
                components[0].h = components[0].v = 1
        elif marker == 0xC2:
            raise UnsupportedJpegFeature("progressive JPEG")
        elif marker in (0xC3, 0xC5, 0xC6, 0xC7, 0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF):
            raise UnsupportedJpegFeature(f"SOF marker 0xFF{marker:02X}")
        elif marker == 0xCC:
            raise UnsupportedJpegFeature("arithmetic coding")
        elif marker == 0xC4:  # DHT
            p = 0
            while p < len(payload):
                if p + 17 > len(payload):
                    raise CorruptStream("truncated DHT")
                tclass, tid = payload[p] >> 4, payload[p] & 0xF
                bits = list(payload[p + 1 : p + 17])
                count = sum(bits)
                if p + 17 + count > len(payload):
                    raise CorruptStream("truncated DHT values")
                values = list(payload[p + 17 : p + 17 + count])
                table = _HuffDecoder(bits, values)
                (dc_tables if tclass == 0 else ac_tables)[tid] = table
                p += 17 + count
        elif marker == 0xDD:  # DRI
            if len(payload) != 2:
                raise CorruptStream("bad DRI length")
            (restart_interval,) = struct.unpack(">H", payload)
        elif marker == 0xDA:  # SOS
            if not components:
                raise CorruptStream("SOS before SOF")
            ns = payload[0]
            if ns != len(components):
                raise UnsupportedJpegFeature("multi-scan stream")
            if len(payload) != 1 + 2 * ns + 3:
                raise CorruptStream("bad SOS length")
            order = []
            for s in range(ns):
                cid, tables = payload[1 + 2 * s], payload[2 + 2 * s]
                comp = next((c for c in components if c.cid == cid), None)
                if comp is None:
                    raise CorruptStream(f"scan references unknown component {cid}")
                td, ta = tables >> 4, tables & 0xF
                if td not in dc_tables or ta not in ac_tables:
                    raise CorruptStream("scan references missing Huffman table")
                comp.dc_table = dc_tables[td]
                comp.ac_table = ac_tables[ta]
                order.append(comp)
            components = order
            scan_segments, i = _split_scan(data, i)
            break
        # other APPn/COM segments are skipped

    if scan_segments is None or height is None:
        raise CorruptStream("no scan data")
    for comp in components:
        if comp.tq not in qtables:
            raise CorruptStream(f"component references missing quant table {comp.tq}")

    hmax = max(c.h for c in components)
    vmax = max(c.v for c in components)
    mcus_x = -(-width // (8 * hmax))
    mcus_y = -(-height // (8 * vmax))
    total_mcus = mcus_x * mcus_y

    for comp in components:
        comp.bw = mcus_x * comp.h
        comp.bh = mcus_y * comp.v
        comp.blocks = [[0] * 64 for _ in range(comp.bw * comp.bh)]
        comp.pred = 0

    # expected MCU counts per restart segment
    if restart_interval:
        expected = []
        remaining = total_mcus
        while remaining > 0:
            expected.append(min(restart_interval, remaining))
            remaining -= restart_interval
    else:
        expected = [total_mcus]
    if len(scan_segments) < len(expected):
        raise CorruptStream(f"{len(scan_segments)} entropy segments, expected {len(expected)}")

    mcu = 0
    for seg_idx, seg_mcus in enumerate(expected):
        seg = scan_segments[seg_idx]
        seg_len = len(seg)
        pos = buf = nbits = padded = 0
        for comp in components:
            comp.pred = 0
        for _ in range(seg_mcus):
            my, mx = divmod(mcu, mcus_x)
            for comp in components:
                for by in range(comp.v):
                    for bx in range(comp.h):
                        block = [0] * 64
                        pos, buf, nbits, padded, comp.pred = _decode_block(
                            seg, seg_len, pos, buf, nbits, padded,
                            comp.pred, comp.dc_table, comp.ac_table, block,
                        )
                        comp.blocks[(my * comp.v + by) * comp.bw + (mx * comp.h + bx)] = block
            mcu += 1
        if padded * 8 > nbits:  # decoded symbols consumed bits past the real data
            raise CorruptStream("entropy segment too short for its MCUs")

    # reconstruct planes: integer IDCT samples, then integer upsampling
    planes = []
    for comp in components:
        coeffs = np.asarray(comp.blocks, dtype=np.int64)[:, _UNZIGZAG]
        coeffs *= qtables[comp.tq].reshape(-1).astype(np.int64)
        spatial = _idct_islow(coeffs.reshape(-1, 8, 8))
        ph, pw = comp.bh * 8, comp.bw * 8
        plane = spatial.reshape(comp.bh, comp.bw, 8, 8).transpose(0, 2, 1, 3).reshape(ph, pw)
        cw = -(-width * comp.h // hmax)
        ch = -(-height * comp.v // vmax)
        plane = plane[:ch, :cw]
        fh, fv = hmax // comp.h, vmax // comp.v
        if fh == 2 and fv == 2:
            plane = _upsample_h2v2(plane)
        elif fh == 2:
            plane = _upsample_h2(plane)
        elif fv == 2:
            plane = _upsample_h2(plane.T).T
        planes.append(plane[:height, :width])

    if len(planes) == 1:
        return Image.from_array(planes[0].astype(np.uint8)[:, :, None])
    rgb = _ycbcr_to_rgb(planes[0], planes[1], planes[2])
    return Image.from_array(rgb)


def _upsample_h2(plane: np.ndarray) -> np.ndarray:
    """Horizontal x2 triangle upsampling with the reference decoder's integer
    rounding: nearer sample weighted 3/4, further 1/4. Planes at most two
    samples wide are replicated instead, as the reference decoder does."""
    h, m = plane.shape
    if m <= 2:
        return np.repeat(plane, 2, axis=1)
    out = np.empty((h, 2 * m), dtype=np.int32)
    out[:, 0] = plane[:, 0]
    out[:, 2::2] = (3 * plane[:, 1:] + plane[:, :-1] + 1) >> 2
    out[:, 1:-1:2] = (3 * plane[:, :-1] + plane[:, 1:] + 2) >> 2
    out[:, -1] = plane[:, -1]
    return out


def _upsample_h2v2(plane: np.ndarray) -> np.ndarray:
    """2x2 triangle upsampling: vertical 3:1 column sums, then a horizontal
    3:1 blend with a single final rounding, as the reference decoder does.
    Planes at most two samples wide are replicated instead."""
    mh, m = plane.shape
    if m <= 2:
        return np.repeat(np.repeat(plane, 2, axis=0), 2, axis=1)
    up = np.concatenate([plane[:1], plane[:-1]], axis=0)
    down = np.concatenate([plane[1:], plane[-1:]], axis=0)
    colsum = np.empty((2 * mh, m), dtype=np.int32)
    colsum[0::2] = 3 * plane + up
    colsum[1::2] = 3 * plane + down
    out = np.empty((2 * mh, 2 * m), dtype=np.int32)
    out[:, 0] = (colsum[:, 0] * 4 + 8) >> 4
    out[:, 2::2] = (3 * colsum[:, 1:] + colsum[:, :-1] + 8) >> 4
    out[:, 1:-1:2] = (3 * colsum[:, :-1] + colsum[:, 1:] + 7) >> 4
    out[:, -1] = (colsum[:, -1] * 4 + 7) >> 4
    return out
