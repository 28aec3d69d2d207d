"""Naive scalar double-loop reference implementations.

These deliberately share no code with the kernels they check: plain Python
loops over nested lists, one pixel at a time. Slow but unambiguous.
"""
import math

import numpy as np


def gray_oracle(arr: np.ndarray) -> np.ndarray:
    """BT.601 grayscale of an (H, W, 3) array; u8 rounds half away from zero."""
    h, w, _ = arr.shape
    px = arr.tolist()
    out = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            r, g, b = px[y][x]
            v = r * 0.299 + g * 0.587 + b * 0.114
            out[y][x] = math.floor(v + 0.5) if arr.dtype == np.uint8 else v
    dt = np.uint8 if arr.dtype == np.uint8 else np.float32
    return np.array(out, dtype=dt).reshape(h, w, 1)


def flip_oracle(arr: np.ndarray) -> np.ndarray:
    h, w, c = arr.shape
    px = arr.tolist()
    out = [[[0] * c for _ in range(w)] for _ in range(h)]
    for y in range(h):
        for x in range(w):
            out[y][x] = px[y][w - 1 - x]
    return np.array(out, dtype=arr.dtype)


def nearest_index_oracle(x: int, dst_n: int, src_n: int) -> int:
    """Round-half-down pixel-center mapping for a single coordinate."""
    scale = src_n / dst_n
    z = (x + 0.5) * scale
    return min(max(math.ceil(z) - 1, 0), src_n - 1)


def nearest_oracle(arr: np.ndarray, dst_w: int, dst_h: int) -> np.ndarray:
    h, w, c = arr.shape
    px = arr.tolist()
    out = [[[0] * c for _ in range(dst_w)] for _ in range(dst_h)]
    for y in range(dst_h):
        sy = nearest_index_oracle(y, dst_h, h)
        for x in range(dst_w):
            sx = nearest_index_oracle(x, dst_w, w)
            out[y][x] = px[sy][sx]
    return np.array(out, dtype=arr.dtype)


def bilinear_oracle(arr: np.ndarray, dst_w: int, dst_h: int) -> np.ndarray:
    h, w, c = arr.shape
    px = arr.tolist()
    out = [[[0.0] * c for _ in range(dst_w)] for _ in range(dst_h)]
    for y in range(dst_h):
        sy = min(max((y + 0.5) * h / dst_h - 0.5, 0.0), h - 1.0)
        y0 = math.floor(sy)
        y1 = min(y0 + 1, h - 1)
        fy = sy - y0
        for x in range(dst_w):
            sx = min(max((x + 0.5) * w / dst_w - 0.5, 0.0), w - 1.0)
            x0 = math.floor(sx)
            x1 = min(x0 + 1, w - 1)
            fx = sx - x0
            for ch in range(c):
                top = px[y0][x0][ch] * (1 - fx) + px[y0][x1][ch] * fx
                bot = px[y1][x0][ch] * (1 - fx) + px[y1][x1][ch] * fx
                out[y][x][ch] = top * (1 - fy) + bot * fy
    return np.array(out, dtype=np.float32)


_KX = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
_KY = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]


def sobel_oracle(arr: np.ndarray) -> np.ndarray:
    """3x3 Sobel magnitude with replicate border, one pixel at a time."""
    h, w, c = arr.shape
    px = arr.tolist()
    out = [[[0.0] * c for _ in range(w)] for _ in range(h)]
    for y in range(h):
        for x in range(w):
            for ch in range(c):
                gx = 0.0
                gy = 0.0
                for dy in (-1, 0, 1):
                    yy = min(max(y + dy, 0), h - 1)
                    for dx in (-1, 0, 1):
                        xx = min(max(x + dx, 0), w - 1)
                        v = px[yy][xx][ch]
                        gx += _KX[dy + 1][dx + 1] * v
                        gy += _KY[dy + 1][dx + 1] * v
                out[y][x][ch] = math.sqrt(gx * gx + gy * gy)
    return np.array(out, dtype=np.float32)
