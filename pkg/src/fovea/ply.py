"""PLY point-cloud reader and writer.

Supports `format ascii 1.0` and `format binary_little_endian 1.0` with a
vertex element carrying x, y, z (float or double), optional red/green/blue
(uchar), and optional nx/ny/nz. Unknown fixed-size properties are skipped;
list properties and big-endian files are rejected.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import IoFailure, MalformedHeader, TruncatedBody, UnsupportedFormat
from .geometry import PointCloud

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


@dataclass
class _Element:
    name: str
    count: int
    properties: list[tuple[str, str]]  # (name, numpy dtype code)


def _parse_header(data: bytes) -> tuple[str, list[_Element], int]:
    """Returns (format, elements, body offset)."""
    end = data.find(b"end_header")
    if end < 0:
        raise MalformedHeader("no end_header")
    nl = data.find(b"\n", end)
    if nl < 0:
        raise MalformedHeader("no newline after end_header")
    body_start = nl + 1

    try:
        text = data[:end].decode("ascii")
    except UnicodeDecodeError as e:
        raise MalformedHeader(f"header is not ascii: {e}") from None
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "ply":
        raise MalformedHeader("missing 'ply' magic")

    fmt = None
    elements: list[_Element] = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "comment" or parts[0] == "obj_info":
            continue
        if parts[0] == "format":
            if len(parts) != 3 or parts[2] != "1.0":
                raise MalformedHeader(f"bad format line: {ln!r}")
            if parts[1] == "binary_big_endian":
                raise UnsupportedFormat("binary_big_endian is not supported")
            if parts[1] not in ("ascii", "binary_little_endian"):
                raise MalformedHeader(f"unknown format {parts[1]!r}")
            fmt = parts[1]
        elif parts[0] == "element":
            if len(parts) != 3:
                raise MalformedHeader(f"bad element line: {ln!r}")
            try:
                count = int(parts[2])
            except ValueError:
                raise MalformedHeader(f"bad element count in {ln!r}") from None
            if count < 0:
                raise MalformedHeader(f"negative element count in {ln!r}")
            elements.append(_Element(parts[1], count, []))
        elif parts[0] == "property":
            if not elements:
                raise MalformedHeader("property before any element")
            if parts[1] == "list":
                raise UnsupportedFormat("list properties are not supported")
            if len(parts) != 3:
                raise MalformedHeader(f"bad property line: {ln!r}")
            if parts[1] not in _PLY_TYPES:
                raise MalformedHeader(f"unknown property type {parts[1]!r}")
            elements[-1].properties.append((parts[2], _PLY_TYPES[parts[1]]))
        else:
            raise MalformedHeader(f"unknown header keyword {parts[0]!r}")
    if fmt is None:
        raise MalformedHeader("missing format line")
    return fmt, elements, body_start


def _cloud_from_records(rec: np.ndarray, names: list[str]) -> PointCloud:
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise MalformedHeader(f"vertex element lacks property {axis!r}")
    points = np.stack([rec["x"], rec["y"], rec["z"]], axis=1).astype(np.float64)
    colors = None
    if all(c in names for c in ("red", "green", "blue")):
        colors = np.stack([rec["red"], rec["green"], rec["blue"]], axis=1).astype(np.uint8)
    normals = None
    if all(c in names for c in ("nx", "ny", "nz")):
        normals = np.stack([rec["nx"], rec["ny"], rec["nz"]], axis=1).astype(np.float64)
    return PointCloud(points, colors, normals)


def read_ply(path) -> PointCloud:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    return read_ply_bytes(data)


def read_ply_bytes(data: bytes) -> PointCloud:
    fmt, elements, body_start = _parse_header(data)

    vertex = next((e for e in elements if e.name == "vertex"), None)
    if vertex is None:
        raise MalformedHeader("no vertex element")
    names = [name for name, _ in vertex.properties]

    if fmt == "binary_little_endian":
        offset = body_start
        for elem in elements:
            dtype = np.dtype([(n, "<" + t) for n, t in elem.properties])
            nbytes = dtype.itemsize * elem.count
            if elem.name == "vertex":
                if len(data) - offset < nbytes:
                    raise TruncatedBody(
                        f"vertex element needs {nbytes} bytes, {len(data) - offset} available"
                    )
                rec = np.frombuffer(data, dtype=dtype, count=elem.count, offset=offset)
                return _cloud_from_records(rec, names)
            offset += nbytes  # skip any element preceding vertex
        raise MalformedHeader("no vertex element")  # unreachable; vertex checked above

    # ascii
    rows = data[body_start:].decode("ascii", errors="replace").splitlines()
    rows = [r for r in (row.strip() for row in rows) if r]
    start = 0
    for elem in elements:
        if elem.name == "vertex":
            if len(rows) - start < elem.count:
                raise TruncatedBody(f"vertex element needs {elem.count} rows, {len(rows) - start} available")
            rec = np.zeros(elem.count, dtype=np.dtype([(n, "<" + t) for n, t in elem.properties]))
            ncols = len(elem.properties)
            for i in range(elem.count):
                cols = rows[start + i].split()
                if len(cols) < ncols:
                    raise TruncatedBody(f"vertex row {i} has {len(cols)} columns, expected {ncols}")
                try:
                    for (pname, _), value in zip(elem.properties, cols):
                        rec[pname][i] = float(value)
                except ValueError as e:
                    raise TruncatedBody(f"vertex row {i}: {e}") from None
            return _cloud_from_records(rec, names)
        start += elem.count
    raise MalformedHeader("no vertex element")


def _header_lines(pc: PointCloud, fmt: str) -> list[str]:
    lines = ["ply", f"format {fmt} 1.0", f"element vertex {len(pc)}"]
    lines += [f"property double {a}" for a in ("x", "y", "z")]
    if pc.colors is not None:
        lines += [f"property uchar {c}" for c in ("red", "green", "blue")]
    if pc.normals is not None:
        lines += [f"property double {n}" for n in ("nx", "ny", "nz")]
    lines.append("end_header")
    return lines


def write_ply_bytes(pc: PointCloud, mode: str = "binary_little_endian") -> bytes:
    """Serialize a cloud; ascii prints 9 significant digits, binary
    round-trips f64 bit-exactly."""
    if mode not in ("ascii", "binary_little_endian"):
        raise UnsupportedFormat(f"mode must be ascii or binary_little_endian, got {mode!r}")
    out = bytearray(("\n".join(_header_lines(pc, mode)) + "\n").encode("ascii"))
    if mode == "binary_little_endian":
        fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
        if pc.colors is not None:
            fields += [("red", "<u1"), ("green", "<u1"), ("blue", "<u1")]
        if pc.normals is not None:
            fields += [("nx", "<f8"), ("ny", "<f8"), ("nz", "<f8")]
        rec = np.zeros(len(pc), dtype=np.dtype(fields))
        rec["x"], rec["y"], rec["z"] = pc.points[:, 0], pc.points[:, 1], pc.points[:, 2]
        if pc.colors is not None:
            rec["red"], rec["green"], rec["blue"] = pc.colors[:, 0], pc.colors[:, 1], pc.colors[:, 2]
        if pc.normals is not None:
            rec["nx"], rec["ny"], rec["nz"] = pc.normals[:, 0], pc.normals[:, 1], pc.normals[:, 2]
        out += rec.tobytes()
    else:
        rows = []
        for i in range(len(pc)):
            cols = ["%.9g" % v for v in pc.points[i]]
            if pc.colors is not None:
                cols += [str(int(v)) for v in pc.colors[i]]
            if pc.normals is not None:
                cols += ["%.9g" % v for v in pc.normals[i]]
            rows.append(" ".join(cols))
        if rows:
            out += ("\n".join(rows) + "\n").encode("ascii")
    return bytes(out)


def write_ply(pc: PointCloud, path, mode: str = "binary_little_endian") -> None:
    """Write a cloud readable by `read_ply` and common external viewers."""
    data = write_ply_bytes(pc, mode)
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
