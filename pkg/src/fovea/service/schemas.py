"""Request/response models for the HTTP service.

Pixel buffers travel as base64 of the raw interleaved row-major bytes
(native little-endian for u16); point clouds travel as base64 PLY files.
"""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ImagePayload(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    channels: int = Field(ge=1, le=4)
    dtype: Literal["u8", "u16"] = "u8"
    data_b64: str


class DecodeRequest(BaseModel):
    data_b64: str


class DecodeResponse(ImagePayload):
    format: Literal["png", "jpeg"]


class ResizeRequest(ImagePayload):
    new_width: int = Field(ge=1)
    new_height: int = Field(ge=1)
    mode: Literal["nearest", "bilinear"] = "nearest"


class EncodeJpegRequest(ImagePayload):
    quality: int = Field(default=90, ge=1, le=100)


class EncodeJpegResponse(BaseModel):
    data_b64: str


class EncodePngRequest(ImagePayload):
    pass


class EncodePngResponse(BaseModel):
    data_b64: str


class BenchRequest(BaseModel):
    op: str
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    iterations: int = Field(default=100, ge=1)
    warmup: int = Field(default=5, ge=0)


class BenchReportModel(BaseModel):
    op: str
    width: int
    height: int
    iterations: int
    mean_ns: float
    median_ns: float
    p95_ns: float
    stddev_ns: float
    throughput_megapixels_per_s: Optional[float]
    timestamp: str
    profile: str


class IcpAlignRequest(BaseModel):
    source_ply_b64: str
    target_ply_b64: str
    max_iterations: int = Field(default=50, ge=1)
    tolerance: float = Field(default=1e-6, gt=0)
    max_correspondence_distance: Optional[float] = Field(default=None, gt=0)


class IcpAlignResponse(BaseModel):
    rotation: list[float] = Field(min_length=9, max_length=9)  # row-major 3x3
    translation: list[float] = Field(min_length=3, max_length=3)
    iterations: int
    final_rmse: float
    converged: bool
    rmse_trace: list[float]
    aligned_ply_b64: str


class MakeFixtureRequest(BaseModel):
    n: int = Field(default=1000, ge=3)
    rot_deg: float = Field(default=10.0, ge=0)
    trans: float = Field(default=0.1, ge=0)
    seed: int = 0


class MakeFixtureResponse(BaseModel):
    source_ply_b64: str
    target_ply_b64: str
    rotation: list[float] = Field(min_length=9, max_length=9)
    translation: list[float] = Field(min_length=3, max_length=3)
