import numpy as np
import pytest

from fovea.errors import (
    InvalidPointCloud,
    MalformedHeader,
    ShapeMismatch,
    TruncatedBody,
    UnsupportedFormat,
)
from fovea.geometry import (
    PointCloud,
    RigidTransform,
    compose,
    inverse,
    rotation_about_z,
    rotation_from_axis_angle,
    transform_points,
)
from fovea.ply import read_ply, write_ply


def random_transform(rng) -> RigidTransform:
    axis = rng.normal(size=3)
    angle = rng.uniform(-np.pi, np.pi)
    return RigidTransform(rotation_from_axis_angle(axis, angle), rng.normal(size=3))


def random_cloud(rng, n=50, colors=False, normals=False) -> PointCloud:
    nm = rng.normal(size=(n, 3))
    nm /= np.linalg.norm(nm, axis=1, keepdims=True)
    return PointCloud(
        rng.uniform(-1, 1, size=(n, 3)),
        rng.integers(0, 256, size=(n, 3), dtype=np.uint8) if colors else None,
        nm if normals else None,
    )


class TestPointCloud:
    def test_rejects_nan(self):
        pts = np.zeros((3, 3))
        pts[1, 2] = np.nan
        with pytest.raises(InvalidPointCloud):
            PointCloud(pts)

    def test_rejects_mismatched_colors(self):
        with pytest.raises(InvalidPointCloud):
            PointCloud(np.zeros((3, 3)), colors=np.zeros((2, 3), dtype=np.uint8))

    def test_extent(self):
        pc = PointCloud(np.array([[0.0, 0, 0], [1.0, 1, 1]]))
        assert pc.extent() == pytest.approx(np.sqrt(3))


class TestRigidTransform:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(ShapeMismatch):
            RigidTransform(np.eye(3) * 1.01, np.zeros(3))

    def test_rejects_reflection(self):
        r = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ShapeMismatch):
            RigidTransform(r, np.zeros(3))

    def test_identity_apply(self):
        pc = PointCloud(np.array([[1.0, 2, 3]]))
        out = pc.like_empty()
        transform_points(RigidTransform.identity(), pc, out)
        assert np.array_equal(out.points, pc.points)

    def test_pure_translation(self):
        pc = PointCloud(np.zeros((1, 3)))
        out = pc.like_empty()
        t = RigidTransform(np.eye(3), np.array([0.0, 0, 1]))
        transform_points(t, pc, out)
        assert np.array_equal(out.points, [[0.0, 0.0, 1.0]])

    def test_rotation_about_z(self):
        pc = PointCloud(np.array([[1.0, 0, 0]]))
        out = pc.like_empty()
        t = RigidTransform(rotation_about_z(np.pi / 2), np.zeros(3))
        transform_points(t, pc, out)
        assert np.max(np.abs(out.points - [[0.0, 1.0, 0.0]])) <= 1e-12

    def test_compose_identity(self, rng):
        t = random_transform(rng)
        c = compose(t, RigidTransform.identity())
        assert np.max(np.abs(c.rotation - t.rotation)) <= 1e-15
        assert np.max(np.abs(c.translation - t.translation)) <= 1e-15

    def test_compose_with_inverse_is_identity(self, rng):
        t = random_transform(rng)
        c = compose(t, inverse(t))
        assert np.max(np.abs(c.rotation - np.eye(3))) <= 1e-12
        assert np.max(np.abs(c.translation)) <= 1e-12

    def test_two_translations_add(self):
        a = RigidTransform(np.eye(3), np.array([1.0, 0, 0]))
        b = RigidTransform(np.eye(3), np.array([0.0, 2, 0]))
        assert np.array_equal(compose(a, b).translation, [1.0, 2.0, 0.0])

    def test_compose_associative(self, rng):
        a, b, c = (random_transform(rng) for _ in range(3))
        left = compose(compose(a, b), c)
        right = compose(a, compose(b, c))
        assert np.max(np.abs(left.rotation - right.rotation)) <= 1e-12
        assert np.max(np.abs(left.translation - right.translation)) <= 1e-12

    def test_inverse_twice(self, rng):
        t = random_transform(rng)
        tt = inverse(inverse(t))
        assert np.max(np.abs(tt.rotation - t.rotation)) <= 1e-12
        assert np.max(np.abs(tt.translation - t.translation)) <= 1e-12

    def test_round_trip_cloud(self, rng):
        pc = random_cloud(rng, 64)
        t = random_transform(rng)
        fwd = pc.like_empty()
        back = pc.like_empty()
        transform_points(t, pc, fwd)
        transform_points(inverse(t), fwd, back)
        assert np.max(np.abs(back.points - pc.points)) <= 1e-10

    def test_distances_preserved(self, rng):
        pc = random_cloud(rng, 40)
        t = random_transform(rng)
        out = pc.like_empty()
        transform_points(t, pc, out)
        d_in = np.linalg.norm(pc.points[:, None] - pc.points[None, :], axis=2)
        d_out = np.linalg.norm(out.points[:, None] - out.points[None, :], axis=2)
        assert np.max(np.abs(d_in - d_out)) <= 1e-9

    def test_normals_rotated(self, rng):
        pc = random_cloud(rng, 10, normals=True)
        t = random_transform(rng)
        out = pc.like_empty()
        transform_points(t, pc, out)
        assert np.max(np.abs(out.normals - pc.normals @ t.rotation.T)) <= 1e-12

    def test_transform_points_allocates_nothing_new(self, rng):
        # out buffers are reused; repeated calls must not grow them
        pc = random_cloud(rng, 100, colors=True, normals=True)
        t = random_transform(rng)
        out = pc.like_empty()
        before = (out.points.ctypes.data, out.colors.ctypes.data, out.normals.ctypes.data)
        for _ in range(5):
            transform_points(t, pc, out)
        after = (out.points.ctypes.data, out.colors.ctypes.data, out.normals.ctypes.data)
        assert before == after


class TestPly:
    def test_ascii_hand_fixture(self, tmp_path):
        p = tmp_path / "two.ply"
        p.write_text(
            "ply\nformat ascii 1.0\nelement vertex 2\n"
            "property float x\nproperty float y\nproperty float z\n"
            "end_header\n1 2 3\n-4.5 0 9\n"
        )
        pc = read_ply(p)
        assert len(pc) == 2
        assert np.array_equal(pc.points, [[1.0, 2.0, 3.0], [-4.5, 0.0, 9.0]])

    def test_binary_round_trip_bit_exact(self, rng, tmp_path):
        pc = random_cloud(rng, 33, colors=True, normals=True)
        path = tmp_path / "c.ply"
        write_ply(pc, path, mode="binary_little_endian")
        back = read_ply(path)
        assert np.array_equal(back.points, pc.points)
        assert np.array_equal(back.colors, pc.colors)
        assert np.array_equal(back.normals, pc.normals)

    def test_ascii_round_trip_within_printed_precision(self, rng, tmp_path):
        pc = random_cloud(rng, 21)
        path = tmp_path / "c.ply"
        write_ply(pc, path, mode="ascii")
        back = read_ply(path)
        assert np.max(np.abs(back.points - pc.points)) <= 1e-8 * np.max(np.abs(pc.points))

    def test_empty_cloud(self, tmp_path):
        pc = PointCloud(np.zeros((0, 3)))
        path = tmp_path / "empty.ply"
        write_ply(pc, path, mode="ascii")
        assert len(read_ply(path)) == 0

    def test_color_header_properties(self, rng, tmp_path):
        pc = random_cloud(rng, 3, colors=True)
        path = tmp_path / "c.ply"
        write_ply(pc, path, mode="ascii")
        header = path.read_bytes().split(b"end_header")[0].decode()
        for prop in ("property uchar red", "property uchar green", "property uchar blue"):
            assert prop in header

    def test_truncated_body(self, tmp_path):
        p = tmp_path / "t.ply"
        p.write_text(
            "ply\nformat ascii 1.0\nelement vertex 10\n"
            "property float x\nproperty float y\nproperty float z\n"
            "end_header\n" + "0 0 0\n" * 7
        )
        with pytest.raises(TruncatedBody):
            read_ply(p)

    def test_binary_truncated(self, rng, tmp_path):
        pc = random_cloud(rng, 8)
        path = tmp_path / "c.ply"
        write_ply(pc, path, mode="binary_little_endian")
        data = path.read_bytes()
        path.write_bytes(data[:-10])
        with pytest.raises(TruncatedBody):
            read_ply(path)

    def test_big_endian_rejected(self, tmp_path):
        p = tmp_path / "b.ply"
        p.write_text("ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n")
        with pytest.raises(UnsupportedFormat):
            read_ply(p)

    def test_malformed_header(self, tmp_path):
        p = tmp_path / "m.ply"
        p.write_text("not a ply\n")
        with pytest.raises(MalformedHeader):
            read_ply(p)

    def test_unknown_properties_skipped(self, tmp_path):
        p = tmp_path / "extra.ply"
        p.write_text(
            "ply\nformat ascii 1.0\nelement vertex 1\n"
            "property float x\nproperty float y\nproperty float z\n"
            "property float confidence\nend_header\n1 2 3 0.9\n"
        )
        pc = read_ply(p)
        assert np.array_equal(pc.points, [[1.0, 2.0, 3.0]])

    def test_double_precision_points_survive_binary(self, tmp_path):
        pts = np.array([[np.pi, np.e, 1.0 / 3.0]])
        path = tmp_path / "pi.ply"
        write_ply(PointCloud(pts), path, mode="binary_little_endian")
        assert np.array_equal(read_ply(path).points, pts)
