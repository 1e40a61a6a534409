"""Segmentation comparison: Dice coefficient, Hausdorff distance, volumes.

Masks are compared through their binary views (``data == label``). Distances
are Euclidean in voxel index units over the full voxel sets; the Hausdorff
implementation goes through an exact Euclidean distance transform and equals
the O(|A|*|R|) definition.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError
from .volume import LabelVolume, require_same_geometry

#: column layout of per-case CSV rows (manual = reference R, alg = result A)
CSV_COLUMNS = ("case_id", "vol_manual_cm3", "vol_alg_cm3", "hd_voxel", "dsc_pct", "time_min")

_SUMMARY_FIELDS = ("vol_manual_cm3", "vol_alg_cm3", "hd_voxel", "dsc_pct", "time_min")


@dataclass
class EvaluationReport:
    """One case's agreement numbers; serializable to JSON and a CSV row."""

    dsc: float
    hausdorff_voxel: float
    volume_a_cm3: float
    volume_r_cm3: float
    voxels_a: int
    voxels_r: int
    voxels_intersection: int
    wall_time_ms: float | None = None
    case_id: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def csv_row(self) -> dict:
        return {
            "case_id": self.case_id or "",
            "vol_manual_cm3": self.volume_r_cm3,
            "vol_alg_cm3": self.volume_a_cm3,
            "hd_voxel": self.hausdorff_voxel,
            "dsc_pct": self.dsc * 100.0,
            "time_min": "" if self.wall_time_ms is None else self.wall_time_ms / 60000.0,
        }


def dsc(a: LabelVolume, r: LabelVolume, label: int = 1) -> float:
    """2*|A∩R| / (|A|+|R|) on integer counts; two empty masks agree (1.0)."""
    require_same_geometry(a, r, "masks")
    av = a.data == label
    rv = r.data == label
    na = int(np.count_nonzero(av))
    nr = int(np.count_nonzero(rv))
    if na == 0 and nr == 0:
        return 1.0
    if na == 0 or nr == 0:
        return 0.0
    inter = int(np.count_nonzero(av & rv))
    return 2 * inter / (na + nr)


def hausdorff(a: LabelVolume, r: LabelVolume, label: int = 1) -> float:
    """Symmetric Hausdorff distance in voxel units over all mask voxels."""
    require_same_geometry(a, r, "masks")
    av = a.data == label
    rv = r.data == label
    if not av.any() or not rv.any():
        raise EmptyMaskError("hausdorff distance is undefined for an empty mask")
    if np.array_equal(av, rv):
        return 0.0
    dist_to_r = ndimage.distance_transform_edt(~rv)
    dist_to_a = ndimage.distance_transform_edt(~av)
    return float(max(dist_to_r[av].max(), dist_to_a[rv].max()))


def volume_cm3(mask: LabelVolume, label: int = 1) -> float:
    """Foreground voxel count times voxel volume, in cm³."""
    sx, sy, sz = mask.spacing
    return int(np.count_nonzero(mask.data == label)) * sx * sy * sz / 1000.0


def evaluate(
    a: LabelVolume,
    r: LabelVolume,
    label: int = 1,
    wall_time_ms: float | None = None,
    case_id: str | None = None,
) -> EvaluationReport:
    """Aggregate DSC, Hausdorff, volumes and counts for result A vs reference R."""
    require_same_geometry(a, r, "masks")
    av = a.data == label
    rv = r.data == label
    return EvaluationReport(
        dsc=dsc(a, r, label),
        hausdorff_voxel=hausdorff(a, r, label),
        volume_a_cm3=volume_cm3(a, label),
        volume_r_cm3=volume_cm3(r, label),
        voxels_a=int(np.count_nonzero(av)),
        voxels_r=int(np.count_nonzero(rv)),
        voxels_intersection=int(np.count_nonzero(av & rv)),
        wall_time_ms=wall_time_ms,
        case_id=case_id,
    )


def summarize(reports: Sequence[EvaluationReport]) -> dict[str, dict[str, float]]:
    """Per-column min/max/mean/std over a batch; std is the sample (n-1) form."""
    rows = [rep.csv_row() for rep in reports]
    out: dict[str, dict[str, float]] = {}
    for name in _SUMMARY_FIELDS:
        vals = [float(row[name]) for row in rows if row[name] != ""]
        if not vals:
            continue
        n = len(vals)
        mean = sum(vals) / n
        std = math.sqrt(sum((v - mean) ** 2 for v in vals) / (n - 1)) if n > 1 else 0.0
        out[name] = {"min": min(vals), "max": max(vals), "mean": mean, "std": std}
    return out


def write_batch_csv(reports: Iterable[EvaluationReport], path) -> None:
    """Per-case rows followed by min/max/mean/std summary rows."""
    reports = list(reports)
    stats = summarize(reports)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for rep in reports:
            writer.writerow(rep.csv_row())
        for stat in ("min", "max", "mean", "std"):
            row = {"case_id": stat}
            for name in _SUMMARY_FIELDS:
                row[name] = stats[name][stat] if name in stats else ""
            writer.writerow(row)
