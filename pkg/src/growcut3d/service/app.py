"""FastAPI application wrapping the segmentation core.

Single-tenant: one volume per process, loaded at startup. Reads (metadata,
slices) are always allowed; mutations (seeds, segment, post-edit) are
serialized per session, and a running segmentation answers 409 to a second
segment request.
"""

from __future__ import annotations

import hashlib
import io

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from PIL import Image

from .. import engine, metrics, morphology
from ..errors import InputValidationError, SegmentationTimeout
from ..strokes import apply_strokes, validate_strokes
from ..volume import AXES, SlicePlane, extract_slice, slice_count
from .rle import encode_rows
from .schemas import (
    MaskSliceRLE,
    MetricsOut,
    PostRequest,
    SeedCounts,
    SeedPayload,
    SegmentRequest,
    SegmentSummary,
    VolumeMeta,
)
from .session import Session


def create_app(
    image=None,
    truth=None,
    *,
    ui_dir: str | None = None,
    cors_origins: tuple[str, ...] = ("*",),
    segment_timeout_s: float = 120.0,
) -> FastAPI:
    app = FastAPI(title="growcut3d", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    session = Session.for_image(image, truth)
    app.state.session = session
    app.state.segment_timeout_s = segment_timeout_s

    @app.exception_handler(InputValidationError)
    async def _validation_handler(_request: Request, exc: InputValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    def need_image() -> None:
        if session.image is None:
            raise HTTPException(status_code=404, detail="no volume loaded")

    def checked_plane(axis: str, index: int) -> SlicePlane:
        if axis not in AXES:
            raise HTTPException(status_code=400, detail=f"axis must be one of {AXES}")
        if not 0 <= index < slice_count(session.image, axis):
            raise HTTPException(
                status_code=400,
                detail=f"{axis} index {index} out of range "
                f"[0, {slice_count(session.image, axis)})",
            )
        return SlicePlane(axis, index)

    @app.get("/api/volume", response_model=VolumeMeta)
    def volume_meta():
        need_image()
        img = session.image
        return VolumeMeta(
            dims=img.dims,
            spacing=img.spacing,
            origin=img.origin,
            intensity_min=session.intensity_min,
            intensity_max=session.intensity_max,
        )

    @app.get("/api/slice/{axis}/{index}")
    def slice_png(axis: str, index: int, window: float | None = None, level: float | None = None):
        need_image()
        plane = checked_plane(axis, index)
        if window is None:
            window = session.intensity_max - session.intensity_min or 1.0
        if level is None:
            level = (session.intensity_max + session.intensity_min) / 2.0
        if window <= 0:
            raise HTTPException(status_code=400, detail="window must be > 0")
        values = extract_slice(session.image, plane).values.astype(np.float64)
        # pixel = clamp((v - (level - window/2)) / window) * 255, half away from zero
        scaled = np.clip((values - (level - window / 2.0)) / window, 0.0, 1.0)
        pixels = np.floor(scaled * 255.0 + 0.5).astype(np.uint8)
        buf = io.BytesIO()
        Image.fromarray(pixels, mode="L").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/api/seeds", response_model=SeedCounts)
    def add_seeds(payload: SeedPayload):
        need_image()
        doc = payload.model_dump()
        strokes = validate_strokes(doc, session.image)
        with session.lock:
            apply_strokes(session.seeds, strokes)
            fg = int(np.count_nonzero(session.seeds == 1))
            bg = int(np.count_nonzero(session.seeds == 2))
        return SeedCounts(foreground=fg, background=bg)

    @app.delete("/api/seeds", response_model=SeedCounts)
    def clear_seeds():
        need_image()
        with session.lock:
            session.clear_seeds()
        return SeedCounts(foreground=0, background=0)

    @app.post("/api/segment", response_model=SegmentSummary)
    def segment(req: SegmentRequest | None = None):
        need_image()
        req = req or SegmentRequest()
        if not session.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a segmentation run is in progress")
        try:
            if not np.any(session.seeds == 1):
                raise HTTPException(status_code=422, detail="no foreground seeds")
            cfg = engine.GrowCutConfig(
                margin_fraction=req.margin_fraction,
                connectivity=req.connectivity,
                max_iterations=req.max_iterations,
                parallel_workers=req.workers,
            )
            try:
                result = engine.run(
                    session.image,
                    session.seed_volume(),
                    cfg,
                    deadline_s=app.state.segment_timeout_s,
                )
            except SegmentationTimeout as exc:
                raise HTTPException(status_code=504, detail=str(exc)) from exc
            session.mask = result.mask
            summary = SegmentSummary(
                iterations_run=result.iterations_run,
                converged=result.converged,
                wall_time_ms=result.wall_time_ms,
                changed_total=int(sum(result.changed_per_iteration)),
                foreground_voxels=int(np.count_nonzero(result.mask.data == 1)),
                mask_sha256=hashlib.sha256(result.mask.data.tobytes()).hexdigest(),
            )
            session.last_summary = summary.model_dump()
            return summary
        finally:
            session.lock.release()

    @app.get("/api/mask/slice/{axis}/{index}", response_model=MaskSliceRLE)
    def mask_slice(axis: str, index: int):
        need_image()
        if session.mask is None:
            raise HTTPException(status_code=404, detail="no mask computed yet")
        plane = checked_plane(axis, index)
        sl = extract_slice(session.mask, plane)
        binary = (sl.values == 1).astype(np.uint8)
        return MaskSliceRLE(
            axis=axis, index=index, width=sl.width, height=sl.height,
            rows=encode_rows(binary),
        )

    @app.post("/api/post", response_model=SegmentSummary)
    def post_edit(req: PostRequest):
        need_image()
        if session.mask is None:
            raise HTTPException(status_code=404, detail="no mask computed yet")
        pipeline = morphology.parse_pipeline(req.ops)  # 422 on bad ops
        with session.lock:
            session.mask = morphology.apply_pipeline(session.mask, pipeline)
            base = session.last_summary or {
                "iterations_run": 0, "converged": True,
                "wall_time_ms": 0.0, "changed_total": 0,
            }
            summary = SegmentSummary(
                iterations_run=base["iterations_run"],
                converged=base["converged"],
                wall_time_ms=base["wall_time_ms"],
                changed_total=base["changed_total"],
                foreground_voxels=int(np.count_nonzero(session.mask.data == 1)),
                mask_sha256=hashlib.sha256(session.mask.data.tobytes()).hexdigest(),
            )
        return summary

    @app.delete("/api/mask")
    def clear_mask():
        with session.lock:
            session.mask = None
            session.last_summary = None
        return {"detail": "mask cleared"}

    @app.get("/api/metrics", response_model=MetricsOut)
    def mask_metrics():
        need_image()
        if session.mask is None:
            raise HTTPException(status_code=404, detail="no mask computed yet")
        if session.truth is None:
            raise HTTPException(status_code=404, detail="no ground truth loaded")
        report = metrics.evaluate(session.mask, session.truth)
        return MetricsOut(**report.to_dict())

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
