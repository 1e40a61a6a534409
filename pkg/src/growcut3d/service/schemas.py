"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class StrokeIn(BaseModel):
    label: int = Field(ge=1, le=2)
    axis: str
    slice_index: int = Field(ge=0)
    brush_radius_voxels: float = Field(ge=0)
    polyline: list[tuple[float, float]] = Field(min_length=1)


class SeedPayload(BaseModel):
    """Same shape as the on-disk stroke JSON document."""

    dims: tuple[int, int, int]
    strokes: list[StrokeIn]


class VolumeMeta(BaseModel):
    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    intensity_min: float
    intensity_max: float


class SeedCounts(BaseModel):
    foreground: int
    background: int


class SegmentRequest(BaseModel):
    margin_fraction: float = Field(default=0.05, ge=0.0, le=1.0)
    connectivity: int = 26
    max_iterations: int = Field(default=2000, ge=1)
    workers: int | None = Field(default=None, ge=1)


class SegmentSummary(BaseModel):
    iterations_run: int
    converged: bool
    wall_time_ms: float
    changed_total: int
    foreground_voxels: int
    mask_sha256: str


class MaskSliceRLE(BaseModel):
    """Binary foreground rows as alternating run lengths, zeros first.

    A row starting with foreground carries a leading 0-length zero run, so
    ``[0, width]`` is a full row and ``[width]`` an empty one.
    """

    axis: str
    index: int
    width: int
    height: int
    rows: list[list[int]]


class PostRequest(BaseModel):
    ops: str = "islands,dilate:1,erode:1"


class MetricsOut(BaseModel):
    dsc: float
    hausdorff_voxel: float
    volume_a_cm3: float
    volume_r_cm3: float
    voxels_a: int
    voxels_r: int
    voxels_intersection: int
    wall_time_ms: float | None
    case_id: str | None
