"""HTTP service wrapping the library: decode/resize/encode, benchmarks, ICP.

Every endpoint is a thin adapter: base64 in, library call, base64 out.
Library errors surface as HTTP 400 with the error class name in the detail.
"""
from __future__ import annotations

import base64
import binascii
import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, imgproc
from ..bench import run_benchmark
from ..errors import FoveaError
from ..geometry import PointCloud, transform_points
from ..icp import ICPConfig, icp_point_to_point
from ..image import Image, ImageSize, ImageType, to_float_scaled
from ..io import decode_image, encode_jpeg, encode_png
from ..ply import read_ply_bytes, write_ply_bytes
from ..synth import seeded_cloud, seeded_perturbation
from ..tensor import Tensor
from . import schemas

app = FastAPI(title="fovea", version=__version__)


@app.exception_handler(FoveaError)
async def fovea_error_handler(request: Request, exc: FoveaError):
    return JSONResponse(status_code=400, content={"detail": f"{type(exc).__name__}: {exc}"})


def _b64_decode(text: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError):
        raise FoveaError("invalid base64 payload") from None


def _image_from_payload(p: schemas.ImagePayload) -> Image:
    dtype = np.uint8 if p.dtype == "u8" else np.uint16
    raw = _b64_decode(p.data_b64)
    expected = p.width * p.height * p.channels * np.dtype(dtype).itemsize
    if len(raw) != expected:
        raise FoveaError(f"payload holds {len(raw)} bytes, expected {expected}")
    arr = np.frombuffer(raw, dtype=dtype).reshape(p.height, p.width, p.channels)
    return Image.from_array(arr)


def _payload_from_image(img: Image) -> dict:
    arr = img.as_array()
    return {
        "width": img.width,
        "height": img.height,
        "channels": img.channels,
        "dtype": "u8" if img.dtype == np.uint8 else "u16",
        "data_b64": base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode("ascii"),
    }


def _resize_u8(img: Image, new_size: ImageSize, mode: str) -> Image:
    dst = ImageType(np.uint8, img.channels).from_size_val(new_size, 0)
    if mode == "nearest":
        imgproc.resize_nearest(img, dst)
        return dst
    # bilinear path: scale to [0,1] floats, resize, convert back
    f32 = ImageType(np.float32, img.channels)
    src_f = f32.from_size_val(img.size, 0.0)
    to_float_scaled(img, src_f)
    dst_f = f32.from_size_val(new_size, 0.0)
    imgproc.resize_bilinear(src_f, dst_f)
    scaled = Tensor.from_shape_slice(
        dst_f.data.shape, dst_f.as_array().reshape(-1) * np.float32(255.0), dtype=np.float32
    )
    return Image(scaled.cast(np.uint8), img.channels)


@app.get("/health", response_model=schemas.HealthResponse)
def health():
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/image/decode", response_model=schemas.DecodeResponse)
def image_decode(req: schemas.DecodeRequest):
    img, fmt = decode_image(_b64_decode(req.data_b64))
    return schemas.DecodeResponse(format=fmt, **_payload_from_image(img))


@app.post("/image/resize", response_model=schemas.ImagePayload)
def image_resize(req: schemas.ResizeRequest):
    if req.dtype != "u8":
        raise FoveaError("resize endpoint accepts u8 images")
    if req.channels not in (1, 3):
        raise FoveaError(f"resize endpoint accepts 1 or 3 channels, got {req.channels}")
    img = _image_from_payload(req)
    out = _resize_u8(img, ImageSize(req.new_width, req.new_height), req.mode)
    return schemas.ImagePayload(**_payload_from_image(out))


@app.post("/image/encode-jpeg", response_model=schemas.EncodeJpegResponse)
def image_encode_jpeg(req: schemas.EncodeJpegRequest):
    if req.dtype != "u8":
        raise FoveaError("JPEG encoding accepts u8 images")
    data = encode_jpeg(_image_from_payload(req), req.quality)
    return schemas.EncodeJpegResponse(data_b64=base64.b64encode(data).decode("ascii"))


@app.post("/image/encode-png", response_model=schemas.EncodePngResponse)
def image_encode_png(req: schemas.EncodePngRequest):
    if req.dtype != "u8":
        raise FoveaError("PNG encoding accepts u8 images")
    data = encode_png(_image_from_payload(req))
    return schemas.EncodePngResponse(data_b64=base64.b64encode(data).decode("ascii"))


@app.post("/bench/run", response_model=schemas.BenchReportModel)
def bench_run(req: schemas.BenchRequest):
    report = run_benchmark(
        req.op, ImageSize(req.width, req.height), iterations=req.iterations, warmup=req.warmup
    )
    return schemas.BenchReportModel(**report.__dict__)


@app.post("/icp/align", response_model=schemas.IcpAlignResponse)
def icp_align(req: schemas.IcpAlignRequest):
    source = read_ply_bytes(_b64_decode(req.source_ply_b64))
    target = read_ply_bytes(_b64_decode(req.target_ply_b64))
    cfg = ICPConfig(
        max_iterations=req.max_iterations,
        convergence_tolerance=req.tolerance,
        max_correspondence_distance=(
            req.max_correspondence_distance if req.max_correspondence_distance else math.inf
        ),
    )
    result = icp_point_to_point(source, target, cfg)
    aligned = source.like_empty()
    transform_points(result.transform, source, aligned)
    return schemas.IcpAlignResponse(
        rotation=result.transform.rotation.reshape(-1).tolist(),
        translation=result.transform.translation.tolist(),
        iterations=result.iterations,
        final_rmse=result.rmse_trace[-1],
        converged=result.converged,
        rmse_trace=result.rmse_trace,
        aligned_ply_b64=base64.b64encode(write_ply_bytes(aligned)).decode("ascii"),
    )


@app.post("/icp/make-fixture", response_model=schemas.MakeFixtureResponse)
def icp_make_fixture(req: schemas.MakeFixtureRequest):
    source = seeded_cloud(req.n, seed=req.seed)
    target, truth = seeded_perturbation(source, rot_deg=req.rot_deg, trans_frac=req.trans, seed=req.seed + 1)
    return schemas.MakeFixtureResponse(
        source_ply_b64=base64.b64encode(write_ply_bytes(source)).decode("ascii"),
        target_ply_b64=base64.b64encode(write_ply_bytes(target)).decode("ascii"),
        rotation=truth.rotation.reshape(-1).tolist(),
        translation=truth.translation.tolist(),
    )
