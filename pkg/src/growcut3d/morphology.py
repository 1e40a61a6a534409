"""Binary post-editing for masks: dilation, erosion, island removal.

All operations act on the binary view ``mask == label`` (label 1 by default),
treat the volume bounds as absorbing (no wraparound; out-of-bounds neighbors
count as background), and return a fresh LabelVolume with values {0, label}.
Inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import InputValidationError
from .volume import LabelVolume

#: post-edit chain applied by the CLI/service "post" step when none is given:
#: island removal, then one dilate + one erode (a closing) with the 6-stencil
DEFAULT_PIPELINE = "islands,dilate:1,erode:1"

_CONNECTIVITY_RANK = {6: 1, 18: 2, 26: 3}


@dataclass(frozen=True)
class StructuringElement:
    """Neighbor stencil named by its 3-D connectivity (6, 18 or 26)."""

    connectivity: int = 6

    def __post_init__(self) -> None:
        if self.connectivity not in _CONNECTIVITY_RANK:
            raise InputValidationError(
                f"connectivity must be one of {sorted(_CONNECTIVITY_RANK)}, "
                f"got {self.connectivity}"
            )

    @property
    def footprint(self) -> np.ndarray:
        return ndimage.generate_binary_structure(3, _CONNECTIVITY_RANK[self.connectivity])


def _as_se(se: StructuringElement | int) -> StructuringElement:
    return se if isinstance(se, StructuringElement) else StructuringElement(se)


def _binary(mask: LabelVolume, label: int) -> np.ndarray:
    return mask.data == label


def _wrap(binary: np.ndarray, like: LabelVolume, label: int) -> LabelVolume:
    return LabelVolume(
        data=binary.astype(np.uint8) * np.uint8(label),
        spacing=like.spacing,
        origin=like.origin,
    )


def dilate(
    mask: LabelVolume,
    se: StructuringElement | int = 6,
    iterations: int = 1,
    label: int = 1,
) -> LabelVolume:
    """Binary dilation of the ``label`` view, ``iterations`` times."""
    if iterations < 1:
        raise InputValidationError(f"iterations must be >= 1, got {iterations}")
    out = ndimage.binary_dilation(
        _binary(mask, label), structure=_as_se(se).footprint, iterations=iterations
    )
    return _wrap(out, mask, label)


def erode(
    mask: LabelVolume,
    se: StructuringElement | int = 6,
    iterations: int = 1,
    label: int = 1,
) -> LabelVolume:
    """Binary erosion; the mask shrinks at volume edges."""
    if iterations < 1:
        raise InputValidationError(f"iterations must be >= 1, got {iterations}")
    out = ndimage.binary_erosion(
        _binary(mask, label),
        structure=_as_se(se).footprint,
        iterations=iterations,
        border_value=0,
    )
    return _wrap(out, mask, label)


def connected_components(
    mask: LabelVolume, connectivity: int = 26, label: int = 1
) -> tuple[np.ndarray, list[int]]:
    """Component id per voxel (0 = background) plus component sizes.

    Ids are renumbered so component k has the k-th smallest first linear
    index, making the labeling deterministic; ``sizes[k-1]`` is component
    k's voxel count.
    """
    if connectivity not in (6, 26):
        raise InputValidationError(f"connectivity must be 6 or 26, got {connectivity}")
    raw, n = ndimage.label(
        _binary(mask, label),
        structure=ndimage.generate_binary_structure(3, _CONNECTIVITY_RANK[connectivity]),
    )
    if n == 0:
        return raw.astype(np.int32), []
    flat = raw.ravel()
    ids, first_idx = np.unique(flat, return_index=True)
    keep = ids != 0
    order = np.argsort(first_idx[keep], kind="stable")  # rank by first linear index
    remap = np.zeros(int(ids.max()) + 1, dtype=np.int32)
    remap[ids[keep][order]] = np.arange(1, int(keep.sum()) + 1, dtype=np.int32)
    relabeled = remap[raw]
    sizes = np.bincount(relabeled.ravel())[1:].tolist()
    return relabeled, sizes


def remove_islands(
    mask: LabelVolume, connectivity: int = 26, label: int = 1
) -> LabelVolume:
    """Keep only the largest component (ties: smallest first linear index)."""
    comps, sizes = connected_components(mask, connectivity, label)
    if not sizes:
        return _wrap(np.zeros(mask.data.shape, dtype=bool), mask, label)
    winner = int(np.argmax(sizes)) + 1  # argmax takes the first = lowest id on ties
    return _wrap(comps == winner, mask, label)


# ---------------------------------------------------------------------------
# Pipeline strings ("islands,dilate:1,erode:1")
# ---------------------------------------------------------------------------

_OPS = ("islands", "dilate", "erode")


def parse_pipeline(spec: str) -> list[tuple[str, int]]:
    """Parse an op chain like ``"islands,dilate:1,erode:2"``.

    ``islands`` takes no count; dilate/erode accept an iteration count
    (default 1). Island removal uses the 26-stencil, dilate/erode the
    6-stencil.
    """
    ops: list[tuple[str, int]] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, arg = part.partition(":")
        name = name.strip().lower()
        if name not in _OPS:
            raise InputValidationError(
                f"unknown post-edit op {name!r}; expected one of {_OPS}"
            )
        if name == "islands":
            if arg:
                raise InputValidationError("'islands' takes no iteration count")
            ops.append((name, 0))
            continue
        try:
            n = int(arg) if arg else 1
        except ValueError as exc:
            raise InputValidationError(f"bad iteration count in {part!r}") from exc
        if n < 1:
            raise InputValidationError(f"iteration count must be >= 1 in {part!r}")
        ops.append((name, n))
    if not ops:
        raise InputValidationError(f"empty post-edit pipeline: {spec!r}")
    return ops


def apply_pipeline(
    mask: LabelVolume, pipeline: str | Sequence[tuple[str, int]] = DEFAULT_PIPELINE, label: int = 1
) -> LabelVolume:
    """Run a parsed or textual op chain over the ``label`` view of ``mask``."""
    ops = parse_pipeline(pipeline) if isinstance(pipeline, str) else list(pipeline)
    out = mask
    for name, n in ops:
        if name == "islands":
            out = remove_islands(out, connectivity=26, label=label)
        elif name == "dilate":
            out = dilate(out, se=6, iterations=n, label=label)
        elif name == "erode":
            out = erode(out, se=6, iterations=n, label=label)
        else:
            raise InputValidationError(f"unknown post-edit op {name!r}")
    return out
