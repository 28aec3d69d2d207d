"""Seeded synthetic fixtures: images for benchmarks, clouds for registration.

Everything here is a pure function of its seed so fixtures are reproducible
byte-for-byte across runs and machines.
"""
from __future__ import annotations

import numpy as np

from .geometry import PointCloud, RigidTransform, rotation_from_axis_angle
from .image import Image


def seeded_u8_image(width: int, height: int, channels: int, seed: int = 0, alloc=None) -> Image:
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(height, width, channels), dtype=np.uint8)
    return Image.from_array(arr, alloc=alloc)


def seeded_f32_image(width: int, height: int, channels: int, seed: int = 0, alloc=None) -> Image:
    rng = np.random.default_rng(seed)
    arr = rng.random(size=(height, width, channels), dtype=np.float32)
    return Image.from_array(arr, alloc=alloc)


def seeded_smooth_u8_image(width: int, height: int, channels: int, seed: int = 0) -> Image:
    """Low-frequency content: sums of 2-D sinusoids plus mild noise.

    Photographic-ish without the per-pixel randomness that makes lossy codec
    comparisons needlessly adversarial.
    """
    rng = np.random.default_rng(seed)
    y = np.linspace(0, 1, height, endpoint=False)[:, None]
    x = np.linspace(0, 1, width, endpoint=False)[None, :]
    out = np.zeros((height, width, channels), dtype=np.float64)
    for c in range(channels):
        acc = np.zeros((height, width))
        for _ in range(4):
            fy, fx = rng.uniform(0.5, 4.0, size=2)
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.uniform(20, 60)
            acc += amp * np.sin(2 * np.pi * (fy * y + fx * x) + phase)
        out[:, :, c] = 128.0 + acc
    out += rng.normal(0.0, 2.0, size=out.shape)
    return Image.from_array(np.clip(np.round(out), 0, 255).astype(np.uint8))


def seeded_cloud(n: int, seed: int = 0, with_colors: bool = True) -> PointCloud:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(n, 3))
    colors = rng.integers(0, 256, size=(n, 3), dtype=np.uint8) if with_colors else None
    return PointCloud(pts, colors)


def seeded_perturbation(
    cloud: PointCloud, rot_deg: float, trans_frac: float, seed: int = 0
) -> tuple[PointCloud, RigidTransform]:
    """Apply a random rigid motion bounded by `rot_deg` degrees and
    `trans_frac` of the cloud extent; returns (moved cloud, ground truth)."""
    rng = np.random.default_rng(seed)
    axis = rng.normal(size=3)
    angle = np.deg2rad(rot_deg) * rng.uniform(0.5, 1.0)
    rotation = rotation_from_axis_angle(axis, angle)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    translation = direction * (trans_frac * cloud.extent() * rng.uniform(0.5, 1.0))
    truth = RigidTransform(rotation, translation)
    moved = PointCloud(truth.apply(cloud.points), cloud.colors, cloud.normals)
    return moved, truth
