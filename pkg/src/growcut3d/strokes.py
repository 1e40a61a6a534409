"""Seed stroke documents and their rasterization into label volumes.

A stroke document is JSON of the form::

    {
      "dims": [nx, ny, nz],
      "strokes": [
        {"label": 1, "axis": "axial", "slice_index": 42,
         "brush_radius_voxels": 2.0, "polyline": [[u, v], ...]}
      ]
    }

Polyline points are in-plane voxel coordinates in the same (u, v) order the
slice extractor uses: axial -> (x, y), sagittal -> (y, z), coronal -> (x, z).
A voxel is painted when its center lies within the brush radius (Euclidean,
in-plane, inclusive) of any polyline segment; later strokes overwrite earlier
ones where they overlap. The CLI and the HTTP service share this one
implementation.
"""

from __future__ import annotations

import json
import math
from typing import Mapping, Sequence

import numpy as np

from .errors import GeometryError, InputValidationError
from .volume import AXES, LabelVolume, Volume, slice_count, slice_shape

_VALID_LABELS = (1, 2)


def load_stroke_file(path) -> dict:
    with open(path) as f:
        doc = json.load(f)
    if not isinstance(doc, Mapping):
        raise InputValidationError(f"stroke file {path} must hold a JSON object")
    return dict(doc)


def _check_stroke(stroke: Mapping, idx: int, geometry: Volume) -> None:
    def bad(msg: str):
        return InputValidationError(f"stroke {idx}: {msg}")

    label = stroke.get("label")
    if label not in _VALID_LABELS:
        raise bad(f"label must be 1 or 2, got {label!r}")
    axis = stroke.get("axis")
    if axis not in AXES:
        raise bad(f"axis must be one of {AXES}, got {axis!r}")
    slice_index = stroke.get("slice_index")
    n_slices = slice_count(geometry, axis)
    if not isinstance(slice_index, int) or not 0 <= slice_index < n_slices:
        raise bad(f"slice_index {slice_index!r} out of range [0, {n_slices})")
    radius = stroke.get("brush_radius_voxels")
    if not isinstance(radius, (int, float)) or not math.isfinite(radius) or radius < 0:
        raise bad(f"brush_radius_voxels must be a finite number >= 0, got {radius!r}")
    polyline = stroke.get("polyline")
    if not isinstance(polyline, Sequence) or len(polyline) == 0:
        raise bad("polyline must be a non-empty list of [u, v] points")
    width, height = slice_shape(geometry, axis)
    for p, point in enumerate(polyline):
        if not isinstance(point, Sequence) or len(point) != 2:
            raise bad(f"polyline point {p} must be [u, v]")
        u, v = point
        if not all(isinstance(c, (int, float)) and math.isfinite(c) for c in (u, v)):
            raise bad(f"polyline point {p} has non-finite coordinates")
        if not (0 <= u <= width - 1 and 0 <= v <= height - 1):
            raise bad(
                f"polyline point {p} ({u}, {v}) outside slice bounds "
                f"[0, {width - 1}] x [0, {height - 1}]"
            )


def validate_strokes(doc: Mapping, geometry: Volume) -> list[dict]:
    """Check a stroke document against a volume; returns the stroke list."""
    dims = doc.get("dims")
    if dims is not None and tuple(dims) != geometry.dims:
        raise GeometryError(
            f"stroke document dims {tuple(dims)} do not match volume dims {geometry.dims}"
        )
    strokes = doc.get("strokes")
    if not isinstance(strokes, Sequence):
        raise InputValidationError("stroke document needs a 'strokes' list")
    for idx, stroke in enumerate(strokes):
        _check_stroke(stroke, idx, geometry)
    return [dict(s) for s in strokes]


def _stamp_segment(plane: np.ndarray, p0, p1, radius: float, value: int) -> None:
    """Paint every lattice point within ``radius`` of segment p0-p1 (inclusive)."""
    height, width = plane.shape  # plane[v, u]
    u0, v0 = float(p0[0]), float(p0[1])
    u1, v1 = float(p1[0]), float(p1[1])
    lo_u = max(0, math.floor(min(u0, u1) - radius))
    hi_u = min(width - 1, math.ceil(max(u0, u1) + radius))
    lo_v = max(0, math.floor(min(v0, v1) - radius))
    hi_v = min(height - 1, math.ceil(max(v0, v1) + radius))
    if lo_u > hi_u or lo_v > hi_v:
        return
    us = np.arange(lo_u, hi_u + 1, dtype=np.float64)
    vs = np.arange(lo_v, hi_v + 1, dtype=np.float64)
    cu, cv = np.meshgrid(us, vs)  # cu[v, u]
    du, dv = u1 - u0, v1 - v0
    seg_len2 = du * du + dv * dv
    if seg_len2 == 0:
        d2 = (cu - u0) ** 2 + (cv - v0) ** 2
    else:
        t = np.clip(((cu - u0) * du + (cv - v0) * dv) / seg_len2, 0.0, 1.0)
        d2 = (cu - (u0 + t * du)) ** 2 + (cv - (v0 + t * dv)) ** 2
    hit = d2 <= radius * radius
    plane[lo_v : hi_v + 1, lo_u : hi_u + 1][hit] = value


def _plane_view(data: np.ndarray, axis: str, index: int) -> np.ndarray:
    # returns a writable (v, u) view matching the slice extractor's layout
    if axis == "axial":
        return data[index, :, :]
    if axis == "sagittal":
        return data[:, :, index]
    return data[:, index, :]  # coronal


def apply_strokes(seed_data: np.ndarray, strokes: Sequence[Mapping]) -> None:
    """Rasterize validated strokes onto ``seed_data`` (shape (nz, ny, nx)), in order."""
    for stroke in strokes:
        plane = _plane_view(seed_data, stroke["axis"], stroke["slice_index"])
        radius = float(stroke["brush_radius_voxels"])
        label = int(stroke["label"])
        polyline = stroke["polyline"]
        if len(polyline) == 1:
            _stamp_segment(plane, polyline[0], polyline[0], radius, label)
            continue
        for p0, p1 in zip(polyline[:-1], polyline[1:]):
            _stamp_segment(plane, p0, p1, radius, label)


def rasterize_strokes(doc: Mapping, geometry: Volume) -> LabelVolume:
    """Validate and rasterize a stroke document into a fresh LabelVolume."""
    strokes = validate_strokes(doc, geometry)
    data = np.zeros(geometry.data.shape, dtype=np.uint8)
    apply_strokes(data, strokes)
    return LabelVolume(data=data, spacing=geometry.spacing, origin=geometry.origin)
