"""Point clouds and SE(3) rigid transforms.

Geometry is double precision throughout; colors stay u8. Transforms are
stored as an explicit rotation matrix plus translation vector, validated for
orthonormality at construction so every transform in the system is a proper
rigid motion.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPointCloud, ShapeMismatch, SizeMismatch

_ORTHO_TOL = 1e-9


def _checked_nx3(arr, dtype, what: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    if out.ndim != 2 or out.shape[1] != 3:
        raise InvalidPointCloud(f"{what} must be an (N, 3) array, got shape {out.shape}")
    return out


@dataclass
class PointCloud:
    """N x 3 double-precision points with optional per-point colors and normals."""

    points: np.ndarray
    colors: np.ndarray | None = None
    normals: np.ndarray | None = None

    def __post_init__(self):
        self.points = _checked_nx3(self.points, np.float64, "points")
        if not np.all(np.isfinite(self.points)):
            raise InvalidPointCloud("points contain NaN or Inf")
        n = self.points.shape[0]
        if self.colors is not None:
            self.colors = _checked_nx3(self.colors, np.uint8, "colors")
            if self.colors.shape[0] != n:
                raise InvalidPointCloud(f"{self.colors.shape[0]} colors for {n} points")
        if self.normals is not None:
            self.normals = _checked_nx3(self.normals, np.float64, "normals")
            if self.normals.shape[0] != n:
                raise InvalidPointCloud(f"{self.normals.shape[0]} normals for {n} points")
            if not np.all(np.isfinite(self.normals)):
                raise InvalidPointCloud("normals contain NaN or Inf")

    def __len__(self) -> int:
        return self.points.shape[0]

    def extent(self) -> float:
        """Bounding-box diagonal; 0 for empty clouds."""
        if len(self) == 0:
            return 0.0
        span = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.linalg.norm(span))

    def like_empty(self) -> "PointCloud":
        """Same-size zeroed cloud with the same optional attributes (for outputs)."""
        return PointCloud(
            np.zeros_like(self.points),
            None if self.colors is None else np.zeros_like(self.colors),
            None if self.normals is None else np.zeros_like(self.normals),
        )


@dataclass(frozen=True)
class RigidTransform:
    """SE(3) element: 3x3 rotation plus translation, p -> R @ p + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.ascontiguousarray(self.rotation, dtype=np.float64)
        t = np.ascontiguousarray(self.translation, dtype=np.float64).reshape(3)
        if r.shape != (3, 3):
            raise ShapeMismatch(f"rotation must be 3x3, got {r.shape}")
        if np.max(np.abs(r.T @ r - np.eye(3))) > _ORTHO_TOL:
            raise ShapeMismatch("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > _ORTHO_TOL:
            raise ShapeMismatch("rotation determinant is not +1 (improper rotation)")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """R @ p + t for an (N, 3) array (allocates the result)."""
        return points @ self.rotation.T + self.translation


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Transform applying b first, then a."""
    return RigidTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def inverse(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -rt @ t.translation)


def transform_points(t: RigidTransform, pc: PointCloud, out: PointCloud) -> None:
    """Write the transformed cloud into `out` (pre-sized); no allocations.

    Colors are carried over unchanged; normals are rotated.
    """
    if len(out) != len(pc):
        raise SizeMismatch(f"output has {len(out)} points, input {len(pc)}")
    np.matmul(pc.points, t.rotation.T, out=out.points)
    out.points += t.translation
    if pc.colors is not None:
        if out.colors is None:
            raise SizeMismatch("input has colors but output cloud does not")
        np.copyto(out.colors, pc.colors)
    if pc.normals is not None:
        if out.normals is None:
            raise SizeMismatch("input has normals but output cloud does not")
        np.matmul(pc.normals, t.rotation.T, out=out.normals)


def rotation_about_z(angle_rad: float) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_axis_angle(axis: np.ndarray, angle_rad: float) -> np.ndarray:
    """Rodrigues formula for a unit axis."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    k = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    return np.eye(3) + np.sin(angle_rad) * k + (1.0 - np.cos(angle_rad)) * (k @ k)
