"""Competitive region-growing cellular automaton over a seed-derived ROI.

Each voxel carries a label and a strength in [0, 1]. Seeds start at strength
1; at every synchronous step a voxel is conquered by the neighbor whose
attack force ``strength_q * g(|C_p - C_q|)`` strictly exceeds its current
strength, where ``g(x) = 1 - x / max_diff`` and ``max_diff`` is the intensity
range of the ROI, precomputed once. The automaton stops when a step changes
nothing.

Determinism contract: steps are double-buffered (all reads from the pre-step
state), attackers are ranked by force, then smaller label, then smaller
linear index, and every per-voxel update is a pure function of the frozen
pre-step buffers. Output is therefore bit-identical for any worker count,
and with saturation tracking on or off.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InputValidationError,
    NoSeedsError,
    SegmentationTimeout,
)
from .volume import LabelVolume, ScalarVolume, require_same_geometry

FOREGROUND = 1
BACKGROUND = 2


@dataclass(frozen=True)
class Roi:
    """Inclusive voxel-index box, (i, j, k) = (x, y, z)."""

    min: tuple[int, int, int]
    max: tuple[int, int, int]

    def __post_init__(self) -> None:
        if any(a > b for a, b in zip(self.min, self.max)):
            raise ValueError(f"Roi min {self.min} exceeds max {self.max}")
        if any(a < 0 for a in self.min):
            raise ValueError(f"Roi min {self.min} has negative index")

    @property
    def shape_zyx(self) -> tuple[int, int, int]:
        return (
            self.max[2] - self.min[2] + 1,
            self.max[1] - self.min[1] + 1,
            self.max[0] - self.min[0] + 1,
        )

    @property
    def slices_zyx(self) -> tuple[slice, slice, slice]:
        return (
            slice(self.min[2], self.max[2] + 1),
            slice(self.min[1], self.max[1] + 1),
            slice(self.min[0], self.max[0] + 1),
        )

    def voxel_count(self) -> int:
        rz, ry, rx = self.shape_zyx
        return rz * ry * rx


@dataclass
class GrowCutConfig:
    """Knobs for ROI margin, neighborhood, iteration cap and threading."""

    margin_fraction: float = 0.05
    connectivity: int = 26
    max_iterations: int = 2000
    parallel_workers: int | None = None  # None = auto (CPU count)

    def __post_init__(self) -> None:
        if not 0.0 <= self.margin_fraction <= 1.0:
            raise InputValidationError(
                f"margin_fraction must be in [0, 1], got {self.margin_fraction}"
            )
        if self.connectivity not in (6, 26):
            raise InputValidationError(
                f"connectivity must be 6 or 26, got {self.connectivity}"
            )
        if self.max_iterations < 1:
            raise InputValidationError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )
        if self.parallel_workers is not None and self.parallel_workers < 1:
            raise InputValidationError(
                f"parallel_workers must be >= 1, got {self.parallel_workers}"
            )

    def resolved_workers(self) -> int:
        return self.parallel_workers or (os.cpu_count() or 1)


@dataclass
class AutomatonState:
    """Per-ROI-voxel (label, strength) plus the cached similarity scale.

    Invariants: strength is 1 exactly at seeds and 0 wherever label is 0 at
    initialization; strength stays in [0, 1] and is non-decreasing per voxel
    across iterations.
    """

    roi: Roi
    label: np.ndarray  # uint8, ROI shape (z, y, x)
    strength: np.ndarray  # float32, ROI shape
    image: ScalarVolume  # full volume the ROI was cut from
    max_diff: float
    iteration: int = 0
    connectivity: int = 26
    workers: int = 1
    saturation_tracking: bool = True
    active: np.ndarray = field(default=None, repr=False)  # bool, ROI shape
    # internals: frozen-read/step-write double buffers
    _norm: np.ndarray = field(default=None, repr=False)  # image ROI / max_diff
    _next_label: np.ndarray = field(default=None, repr=False)
    _next_strength: np.ndarray = field(default=None, repr=False)
    _changed: np.ndarray = field(default=None, repr=False)
    _pool: ThreadPoolExecutor | None = field(default=None, repr=False)

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None


@dataclass
class SegmentationResult:
    """Final mask (full geometry, 0 outside the ROI) plus run diagnostics."""

    mask: LabelVolume
    iterations_run: int
    changed_per_iteration: list[int]
    converged: bool
    wall_time_ms: float
    roi: Roi


# below this many defender rows per slab, thread handoff costs more than it buys;
# capping the effective thread count never changes results, only scheduling
_MIN_SLAB_ROWS = 24


def _neighbor_offsets(connectivity: int) -> list[tuple[int, int, int]]:
    if connectivity == 6:
        offs = [
            (dz, dy, dx)
            for dz in (-1, 0, 1)
            for dy in (-1, 0, 1)
            for dx in (-1, 0, 1)
            if abs(dz) + abs(dy) + abs(dx) == 1
        ]
    elif connectivity == 26:
        offs = [
            (dz, dy, dx)
            for dz in (-1, 0, 1)
            for dy in (-1, 0, 1)
            for dx in (-1, 0, 1)
            if (dz, dy, dx) != (0, 0, 0)
        ]
    else:
        raise InputValidationError(f"connectivity must be 6 or 26, got {connectivity}")
    # ascending (dz, dy, dx) = ascending linear index of the attacker,
    # which is the documented tie-break order
    return sorted(offs)


def attack_strength(delta: float, max_diff: float) -> float:
    """Similarity weight ``1 - delta/max_diff``; 1 at delta 0, 0 at delta max.

    A uniform ROI (max_diff == 0) only ever produces delta == 0, defined as 1.
    """
    if delta < 0:
        raise InputValidationError(f"delta must be >= 0, got {delta}")
    if max_diff < 0:
        raise InputValidationError(f"max_diff must be >= 0, got {max_diff}")
    if delta > max_diff:
        raise InputValidationError(f"delta {delta} exceeds max_diff {max_diff}")
    if max_diff == 0:
        return 1.0
    return 1.0 - delta / max_diff


def compute_roi(seeds: LabelVolume, margin_fraction: float = 0.05) -> Roi:
    """Bounding box of all nonzero seeds, padded per axis and side by
    ``ceil(margin_fraction * extent)`` voxels (minimum 1), clamped to bounds.
    """
    if not 0.0 <= margin_fraction <= 1.0:
        raise InputValidationError(
            f"margin_fraction must be in [0, 1], got {margin_fraction}"
        )
    ks, js, is_ = np.nonzero(seeds.data)
    if is_.size == 0:
        raise NoSeedsError("seed volume has no labeled voxels")
    nx, ny, nz = seeds.dims
    lo_out, hi_out = [], []
    for coords, dim in ((is_, nx), (js, ny), (ks, nz)):
        lo, hi = int(coords.min()), int(coords.max())
        extent = hi - lo + 1
        # round before ceil: 0.05*20 is 1.0000000000000002 in binary floats
        margin = max(1, math.ceil(round(margin_fraction * extent, 9)))
        lo_out.append(max(0, lo - margin))
        hi_out.append(min(dim - 1, hi + margin))
    return Roi(min=tuple(lo_out), max=tuple(hi_out))


def init_state(
    image: ScalarVolume, seeds: LabelVolume, cfg: GrowCutConfig | None = None
) -> AutomatonState:
    """Cut the ROI, plant seeds at strength 1, precompute the intensity range."""
    cfg = cfg or GrowCutConfig()
    require_same_geometry(image, seeds, "image and seeds")
    if not bool(np.any(seeds.data == FOREGROUND)):
        raise NoSeedsError("need at least one foreground seed voxel (label 1)")
    roi = compute_roi(seeds, cfg.margin_fraction)
    sl = roi.slices_zyx

    img_roi = image.data[sl]
    max_diff = float(img_roi.max()) - float(img_roi.min())
    scale = max_diff if max_diff > 0 else 1.0  # uniform ROI: every delta is 0

    label = seeds.data[sl].copy()
    strength = (label != 0).astype(np.float32)
    shape = roi.shape_zyx
    return AutomatonState(
        roi=roi,
        label=label,
        strength=strength,
        image=image,
        max_diff=max_diff,
        connectivity=cfg.connectivity,
        workers=cfg.resolved_workers(),
        active=np.ones(shape, dtype=bool),
        _norm=(img_roi / np.float32(scale)).astype(np.float32),
        _next_label=label.copy(),
        _next_strength=strength.copy(),
        _changed=np.zeros(shape, dtype=bool),
    )


def _attack_ranges(shape, off, z_lo, z_hi, box):
    """dst/src slice pair for attacker offset ``off``, with the defender
    restricted to rows [z_lo, z_hi) and the (y, x) window of ``box``."""
    dz, dy, dx = off
    (bz0, bz1), (by0, by1), (bx0, bx1) = box
    pz0 = max(z_lo, bz0, -dz if dz < 0 else 0)
    pz1 = min(z_hi, bz1, shape[0] - (dz if dz > 0 else 0))
    py0 = max(by0, -dy if dy < 0 else 0)
    py1 = min(by1, shape[1] - (dy if dy > 0 else 0))
    px0 = max(bx0, -dx if dx < 0 else 0)
    px1 = min(bx1, shape[2] - (dx if dx > 0 else 0))
    if pz0 >= pz1 or py0 >= py1 or px0 >= px1:
        return None
    dst = (slice(pz0, pz1), slice(py0, py1), slice(px0, px1))
    src = (slice(pz0 + dz, pz1 + dz), slice(py0 + dy, py1 + dy), slice(px0 + dx, px1 + dx))
    return dst, src


def _attack_slab(state: AutomatonState, offsets, box, z_lo: int, z_hi: int) -> None:
    # reads hit the frozen pre-step buffers only; writes stay inside the slab
    lab, stg, norm = state.label, state.strength, state._norm
    next_lab, next_stg, changed = state._next_label, state._next_strength, state._changed
    active = state.active
    track = state.saturation_tracking
    shape = lab.shape
    for off in offsets:
        ranges = _attack_ranges(shape, off, z_lo, z_hi, box)
        if ranges is None:
            continue
        dst, src = ranges
        lq = lab[src]
        force = stg[src] * (np.float32(1.0) - np.abs(norm[dst] - norm[src]))
        best_s = next_stg[dst]
        best_l = next_lab[dst]
        attacked = changed[dst]
        take = (lq != 0) & (
            (force > best_s) | (attacked & (force == best_s) & (lq < best_l))
        )
        if track:
            take &= active[dst]
        if take.any():
            best_s[take] = force[take]
            best_l[take] = lq[take]
            attacked[take] = True


def _bbox_of(mask: np.ndarray):
    """((z0,z1),(y0,y1),(x0,x1)) half-open bounds of True voxels, or None."""
    if not mask.any():
        return None
    bounds = []
    for axis in range(3):
        other = tuple(a for a in range(3) if a != axis)
        proj = mask.any(axis=other)
        idx = np.flatnonzero(proj)
        bounds.append((int(idx[0]), int(idx[-1]) + 1))
    return tuple(bounds)


def step(state: AutomatonState) -> int:
    """One synchronous update; returns how many voxels changed (label, strength).

    A voxel is re-evaluated only while it has a recently-changed neighbor
    (saturation tracking); voxels skipped this way provably cannot change, so
    the result equals a full sweep bit-for-bit.
    """
    shape = state.label.shape
    if state.saturation_tracking:
        box = _bbox_of(state.active)
        if box is None:
            state.iteration += 1
            return 0
    else:
        box = ((0, shape[0]), (0, shape[1]), (0, shape[2]))

    np.copyto(state._next_label, state.label)
    np.copyto(state._next_strength, state.strength)
    state._changed[...] = False

    offsets = _neighbor_offsets(state.connectivity)
    (z0, z1) = box[0]
    workers = min(state.workers, max(1, (z1 - z0) // _MIN_SLAB_ROWS))
    if workers <= 1:
        _attack_slab(state, offsets, box, z0, z1)
    else:
        if state._pool is None:
            state._pool = ThreadPoolExecutor(max_workers=state.workers)
        bounds = np.linspace(z0, z1, workers + 1).astype(int)
        futures = [
            state._pool.submit(_attack_slab, state, offsets, box, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
            if a < b
        ]
        for fut in futures:
            fut.result()

    changed = state._changed
    count = int(np.count_nonzero(changed))

    # next active set: voxels with at least one changed neighbor
    state.active[...] = False
    if count:
        cbox = _bbox_of(changed)
        grow = tuple((max(0, a - 1), min(n, b + 1)) for (a, b), n in zip(cbox, shape))
        for off in offsets:
            ranges = _attack_ranges(shape, off, grow[0][0], grow[0][1], grow)
            if ranges is None:
                continue
            dst, src = ranges
            state.active[dst] |= changed[src]

    state.label, state._next_label = state._next_label, state.label
    state.strength, state._next_strength = state._next_strength, state.strength
    state.iteration += 1
    return count


def run(
    image: ScalarVolume,
    seeds: LabelVolume,
    cfg: GrowCutConfig | None = None,
    *,
    saturation_tracking: bool = True,
    deadline_s: float | None = None,
) -> SegmentationResult:
    """Iterate until a step changes nothing or ``max_iterations`` is hit.

    ``saturation_tracking=False`` forces a full sweep every step (diagnostic;
    the output is identical). ``deadline_s`` aborts long runs with
    :class:`SegmentationTimeout`.
    """
    cfg = cfg or GrowCutConfig()
    t0 = time.perf_counter()
    state = init_state(image, seeds, cfg)
    state.saturation_tracking = saturation_tracking
    changed_per_iteration: list[int] = []
    converged = False
    try:
        for _ in range(cfg.max_iterations):
            if deadline_s is not None and time.perf_counter() - t0 > deadline_s:
                raise SegmentationTimeout(
                    f"segmentation exceeded {deadline_s:.1f}s "
                    f"after {state.iteration} iterations"
                )
            count = step(state)
            changed_per_iteration.append(count)
            if count == 0:
                converged = True
                break
    finally:
        state.close()

    mask_data = np.zeros(image.data.shape, dtype=np.uint8)
    mask_data[state.roi.slices_zyx] = state.label
    mask = LabelVolume(data=mask_data, spacing=image.spacing, origin=image.origin)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    return SegmentationResult(
        mask=mask,
        iterations_run=len(changed_per_iteration),
        changed_per_iteration=changed_per_iteration,
        converged=converged,
        wall_time_ms=wall_ms,
        roi=state.roi,
    )


def sphere_seed(
    center: tuple[float, float, float],
    r_fg: float,
    r_bg_inner: float,
    r_bg_outer: float,
    *,
    dims: tuple[int, int, int],
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0),
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> LabelVolume:
    """Single-click 3-D initialization: a foreground ball at ``center`` plus a
    background shell, distances measured in voxel index space.

    Label 1 where ``|v - center| <= r_fg``; label 2 where
    ``r_bg_inner <= |v - center| <= r_bg_outer``; 0 elsewhere. Spheres are
    clipped to the volume bounds.
    """
    if not 0 < r_fg < r_bg_inner < r_bg_outer:
        raise InputValidationError(
            f"radii must satisfy 0 < r_fg < r_bg_inner < r_bg_outer, "
            f"got {r_fg}, {r_bg_inner}, {r_bg_outer}"
        )
    nx, ny, nz = dims
    cx, cy, cz = (float(c) for c in center)
    data = np.zeros((nz, ny, nx), dtype=np.uint8)

    # only the box that can contain the outer sphere needs distances
    x0, x1 = max(0, math.floor(cx - r_bg_outer)), min(nx - 1, math.ceil(cx + r_bg_outer))
    y0, y1 = max(0, math.floor(cy - r_bg_outer)), min(ny - 1, math.ceil(cy + r_bg_outer))
    z0, z1 = max(0, math.floor(cz - r_bg_outer)), min(nz - 1, math.ceil(cz + r_bg_outer))
    if x0 > x1 or y0 > y1 or z0 > z1:
        raise InputValidationError("sphere seed lies entirely outside the volume")

    zz = (np.arange(z0, z1 + 1, dtype=np.float64) - cz)[:, None, None] ** 2
    yy = (np.arange(y0, y1 + 1, dtype=np.float64) - cy)[None, :, None] ** 2
    xx = (np.arange(x0, x1 + 1, dtype=np.float64) - cx)[None, None, :] ** 2
    d2 = zz + yy + xx

    box = data[z0 : z1 + 1, y0 : y1 + 1, x0 : x1 + 1]
    box[(d2 >= r_bg_inner**2) & (d2 <= r_bg_outer**2)] = BACKGROUND
    box[d2 <= r_fg**2] = FOREGROUND

    if not np.any(data == FOREGROUND):
        raise InputValidationError("foreground sphere clipped to empty")
    return LabelVolume(data=data, spacing=spacing, origin=origin)
