"""Point-to-point Iterative Closest Point registration.

Correspondences come from an exact 3-D kd-tree (results always equal a
linear scan, ties broken toward the smaller point index), the per-iteration
rigid fit is the SVD method of the cross-covariance matrix with the usual
determinant correction against reflections, and convergence is judged on the
change in RMSE between iterations. Everything here is deterministic:
identical inputs produce bit-identical results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateConfiguration, EmptyPointSet, EmptySet
from .geometry import PointCloud, RigidTransform, compose

_LEAF_SIZE = 16
_RANK_TOL = 1e-12


class KdTree3:
    """Static balanced kd-tree over an (N, 3) f64 point array.

    Median splits with ties ordered by point index make construction
    deterministic; queries are exact, never approximate.
    """

    def __init__(self, points: np.ndarray):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise EmptyPointSet(f"expected an (N, 3) array, got shape {pts.shape}")
        if pts.shape[0] == 0:
            raise EmptyPointSet("cannot build a kd-tree over zero points")
        self._pts = pts
        self._axis: list[int] = []
        self._value: list[float] = []
        self._left: list[int] = []
        self._right: list[int] = []
        self._leaf: list[np.ndarray | None] = []
        self._root = self._build(np.arange(pts.shape[0], dtype=np.int64))

    def _new_node(self) -> int:
        self._axis.append(-1)
        self._value.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._leaf.append(None)
        return len(self._axis) - 1

    def _build(self, idxs: np.ndarray) -> int:
        node = self._new_node()
        if idxs.size <= _LEAF_SIZE:
            self._leaf[node] = idxs
            return node
        sub = self._pts[idxs]
        span = sub.max(axis=0) - sub.min(axis=0)
        axis = int(np.argmax(span))  # widest spread; argmax takes lowest on ties
        order = np.lexsort((idxs, sub[:, axis]))
        mid = idxs.size // 2
        self._axis[node] = axis
        self._value[node] = float(sub[order[mid], axis])
        self._left[node] = self._build(idxs[order[:mid]])
        self._right[node] = self._build(idxs[order[mid:]])
        return node

    def nearest(self, query) -> tuple[int, float]:
        """Index and squared distance of the exact nearest point."""
        q = np.asarray(query, dtype=np.float64).reshape(3)
        best_idx = -1
        best_d2 = math.inf
        stack = [(self._root, 0.0)]
        pts = self._pts
        while stack:
            node, plane_d2 = stack.pop()
            if plane_d2 > best_d2:
                continue
            leaf = self._leaf[node]
            if leaf is not None:
                diff = pts[leaf] - q
                d2 = np.einsum("ij,ij->i", diff, diff)
                m = d2.min()
                if m < best_d2 or (m == best_d2 and int(leaf[d2 == m].min()) < best_idx):
                    best_d2 = float(m)
                    best_idx = int(leaf[d2 == m].min())
                continue
            axis = self._axis[node]
            value = self._value[node]
            delta = q[axis] - value
            near, far = (self._left[node], self._right[node]) if delta < 0 else (self._right[node], self._left[node])
            stack.append((far, delta * delta))
            stack.append((near, plane_d2))
        return best_idx, best_d2

    def nearest_many(self, queries: np.ndarray, out_idx: np.ndarray, out_d2: np.ndarray) -> None:
        """Batch `nearest` into caller-provided arrays, row order preserved."""
        for i in range(queries.shape[0]):
            out_idx[i], out_d2[i] = self.nearest(queries[i])

    def __len__(self) -> int:
        return self._pts.shape[0]


def build_kdtree(points: np.ndarray) -> KdTree3:
    return KdTree3(points)


def nearest_neighbor(tree: KdTree3, query) -> tuple[int, float]:
    return tree.nearest(query)


def fit_rigid_svd(source_pts: np.ndarray, target_pts: np.ndarray) -> RigidTransform:
    """Least-squares rigid transform mapping source onto target.

    Index-aligned pairs; centroids removed, SVD of the cross-covariance,
    det-corrected rotation, translation from the centroids.
    """
    src = np.asarray(source_pts, dtype=np.float64)
    tgt = np.asarray(target_pts, dtype=np.float64)
    if src.shape != tgt.shape or src.ndim != 2 or src.shape[1] != 3:
        raise DegenerateConfiguration(f"need matching (K, 3) arrays, got {src.shape} and {tgt.shape}")
    k = src.shape[0]
    if k < 3:
        raise DegenerateConfiguration(f"need at least 3 point pairs, got {k}")
    mu_s = src.mean(axis=0)
    mu_t = tgt.mean(axis=0)
    h = (src - mu_s).T @ (tgt - mu_t)
    u, s, vh = np.linalg.svd(h)
    if s[0] <= 0.0 or s[1] < _RANK_TOL * s[0]:
        raise DegenerateConfiguration("source points are collinear or coincident")
    v = vh.T
    d = np.linalg.det(v @ u.T)
    r = v @ np.diag([1.0, 1.0, d]) @ u.T
    t = mu_t - r @ mu_s
    return RigidTransform(r, t)


def rmse(source_pts: np.ndarray, target_pts: np.ndarray) -> float:
    """Root mean squared Euclidean distance between index-aligned points."""
    src = np.asarray(source_pts, dtype=np.float64)
    tgt = np.asarray(target_pts, dtype=np.float64)
    if src.shape[0] == 0:
        raise EmptySet("rmse over zero pairs")
    diff = src - tgt
    return float(np.sqrt(np.einsum("ij,ij->", diff, diff) / src.shape[0]))


class Metric(Enum):
    POINT_TO_POINT = "point_to_point"


@dataclass(frozen=True)
class ICPConfig:
    max_iterations: int = 50
    convergence_tolerance: float = 1e-6
    max_correspondence_distance: float = math.inf
    metric: Metric = Metric.POINT_TO_POINT

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.convergence_tolerance > 0:
            raise ValueError("convergence_tolerance must be > 0")
        if not self.max_correspondence_distance > 0:
            raise ValueError("max_correspondence_distance must be > 0")


@dataclass
class ICPResult:
    transform: RigidTransform
    iterations: int
    rmse_trace: list[float] = field(default_factory=list)
    converged: bool = False


def icp_point_to_point(
    source: PointCloud,
    target: PointCloud,
    config: ICPConfig | None = None,
    initial: RigidTransform | None = None,
) -> ICPResult:
    """Align `source` onto `target`; the result maps source frame to target frame.

    Per iteration: transform source with the current estimate, find exact
    nearest targets, gate by max correspondence distance, fit the incremental
    rigid transform on the survivors, accumulate, and record the RMSE of the
    updated pairs. Converged when the RMSE itself, or its change since the
    previous iteration, falls below the tolerance.
    """
    cfg = config if config is not None else ICPConfig()
    t = initial if initial is not None else RigidTransform.identity()
    if len(source) < 3 or len(target) < 3:
        raise DegenerateConfiguration(f"need at least 3 points per cloud, got {len(source)} and {len(target)}")

    tree = KdTree3(target.points)
    transformed = np.empty_like(source.points)
    nn_idx = np.empty(len(source), dtype=np.int64)
    nn_d2 = np.empty(len(source), dtype=np.float64)
    max_d2 = cfg.max_correspondence_distance**2

    trace: list[float] = []
    converged = False
    prev = math.inf
    for _ in range(cfg.max_iterations):
        np.matmul(source.points, t.rotation.T, out=transformed)
        transformed += t.translation
        tree.nearest_many(transformed, nn_idx, nn_d2)
        mask = nn_d2 <= max_d2
        if int(mask.sum()) < 3:
            raise DegenerateConfiguration(
                f"only {int(mask.sum())} correspondences within "
                f"{cfg.max_correspondence_distance}; need at least 3"
            )
        src_pairs = transformed[mask]
        tgt_pairs = target.points[nn_idx[mask]]
        delta = fit_rigid_svd(src_pairs, tgt_pairs)
        t = compose(delta, t)
        cur = rmse(delta.apply(src_pairs), tgt_pairs)
        trace.append(cur)
        if cur < cfg.convergence_tolerance or abs(cur - prev) < cfg.convergence_tolerance:
            converged = True
            break
        prev = cur
    return ICPResult(transform=t, iterations=len(trace), rmse_trace=trace, converged=converged)
