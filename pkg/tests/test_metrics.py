import csv
import math

import numpy as np
import pytest

from growcut3d.errors import EmptyMaskError, GeometryError
from growcut3d.metrics import (
    CSV_COLUMNS,
    dsc,
    evaluate,
    hausdorff,
    summarize,
    volume_cm3,
    write_batch_csv,
)
from growcut3d.volume import LabelVolume

from oracles import brute_hausdorff


def lv(data, spacing=(1.0, 1.0, 1.0)):
    return LabelVolume(data=np.asarray(data, dtype=np.uint8), spacing=spacing)


def random_pair(rng, shape=(8, 8, 8), p=0.3):
    a = (rng.random(shape) < p).astype(np.uint8)
    b = (rng.random(shape) < p).astype(np.uint8)
    return lv(a), lv(b)


class TestDsc:
    def test_identical_nonempty_masks(self):
        rng = np.random.default_rng(0)
        a, _ = random_pair(rng)
        assert dsc(a, lv(a.data.copy())) == 1.0

    def test_disjoint_masks(self):
        a = np.zeros((4, 4, 4)); a[0, 0, 0] = 1
        b = np.zeros((4, 4, 4)); b[3, 3, 3] = 1
        assert dsc(lv(a), lv(b)) == 0.0

    def test_partial_overlap_ratio(self):
        a = np.zeros((4, 4, 4)); a[0, 0, 0:4] = 1  # |A| = 4
        b = np.zeros((4, 4, 4)); b[0, 0, 0:2] = 1  # |R| = 2, overlap 2
        assert dsc(lv(a), lv(b)) == pytest.approx(2 * 2 / (4 + 2))

    def test_empty_conventions(self):
        empty = lv(np.zeros((3, 3, 3)))
        one = np.zeros((3, 3, 3)); one[1, 1, 1] = 1
        assert dsc(empty, lv(np.zeros((3, 3, 3)))) == 1.0
        assert dsc(empty, lv(one)) == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            a, b = random_pair(rng)
            assert dsc(a, b) == dsc(b, a)

    def test_geometry_mismatch_rejected(self):
        a = lv(np.zeros((3, 3, 3)))
        b = lv(np.zeros((3, 3, 4)))
        with pytest.raises(GeometryError):
            dsc(a, b)


class TestHausdorff:
    def test_identical_masks_are_at_distance_zero(self):
        rng = np.random.default_rng(2)
        a, _ = random_pair(rng)
        a.data[0, 0, 0] = 1  # never empty
        assert hausdorff(a, lv(a.data.copy())) == 0.0

    def test_three_four_five_triangle(self):
        a = np.zeros((6, 6, 6)); a[0, 0, 0] = 1
        b = np.zeros((6, 6, 6)); b[0, 4, 3] = 1  # (i, j, k) = (3, 4, 0)
        assert hausdorff(lv(a), lv(b)) == 5.0

    def test_matches_brute_force_on_random_masks(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            shape = tuple(int(d) for d in rng.integers(3, 13, size=3))
            a = (rng.random(shape) < 0.2)
            b = (rng.random(shape) < 0.2)
            if not a.any() or not b.any():
                continue
            got = hausdorff(lv(a), lv(b))
            want = brute_hausdorff(a, b)
            assert abs(got - want) <= 1e-9

    def test_empty_mask_rejected(self):
        a = np.zeros((3, 3, 3)); a[0, 0, 0] = 1
        with pytest.raises(EmptyMaskError):
            hausdorff(lv(a), lv(np.zeros((3, 3, 3))))

    def test_symmetry_and_translation_invariance(self):
        rng = np.random.default_rng(4)
        base_a = (rng.random((6, 6, 6)) < 0.3)
        base_b = (rng.random((6, 6, 6)) < 0.3)
        base_a[0, 0, 0] = base_b[0, 0, 0] = True
        pad_a = np.zeros((10, 10, 10), dtype=bool); pad_a[:6, :6, :6] = base_a
        pad_b = np.zeros((10, 10, 10), dtype=bool); pad_b[:6, :6, :6] = base_b
        d0 = hausdorff(lv(pad_a), lv(pad_b))
        assert d0 == hausdorff(lv(pad_b), lv(pad_a))
        shift_a = np.roll(pad_a, (2, 3, 1), axis=(0, 1, 2))
        shift_b = np.roll(pad_b, (2, 3, 1), axis=(0, 1, 2))
        assert hausdorff(lv(shift_a), lv(shift_b)) == pytest.approx(d0, abs=1e-12)


class TestVolume:
    def test_empty_mask_is_zero(self):
        assert volume_cm3(lv(np.zeros((4, 4, 4)))) == 0.0

    def test_thousand_voxels_at_0p63(self):
        data = np.zeros((10, 10, 10), dtype=np.uint8)
        data.ravel()[:1000] = 1
        got = volume_cm3(lv(data, spacing=(0.63, 0.63, 0.63)))
        assert got == pytest.approx(1000 * 0.63**3 / 1000.0)
        assert got == pytest.approx(0.250047)


class TestEvaluate:
    def test_self_evaluation(self):
        rng = np.random.default_rng(5)
        a, _ = random_pair(rng)
        a.data[0, 0, 0] = 1
        rep = evaluate(a, lv(a.data.copy()), wall_time_ms=1234.0, case_id="self")
        assert rep.dsc == 1.0
        assert rep.hausdorff_voxel == 0.0
        assert rep.volume_a_cm3 == rep.volume_r_cm3
        assert rep.voxels_a == rep.voxels_r == rep.voxels_intersection

    def test_report_internal_consistency(self):
        rng = np.random.default_rng(6)
        a, b = random_pair(rng)
        a.data[0, 0, 0] = b.data[0, 0, 0] = 1
        rep = evaluate(a, b)
        assert rep.dsc == 2 * rep.voxels_intersection / (rep.voxels_a + rep.voxels_r)
        sx, sy, sz = a.spacing
        assert rep.volume_a_cm3 == rep.voxels_a * sx * sy * sz / 1000.0

    def test_json_round_trip(self):
        rng = np.random.default_rng(7)
        a, b = random_pair(rng)
        a.data[0, 0, 0] = b.data[0, 0, 0] = 1
        rep = evaluate(a, b, case_id="c1")
        import json

        assert json.loads(rep.to_json())["case_id"] == "c1"


class TestBatchCsv:
    def _batch(self, n=13):
        rng = np.random.default_rng(8)
        reports = []
        for i in range(n):
            a, b = random_pair(rng, shape=(7, 7, 7))
            a.data[0, 0, 0] = b.data[0, 0, 0] = 1
            reports.append(
                evaluate(a, b, wall_time_ms=float(rng.uniform(100, 900)), case_id=f"case{i:02d}")
            )
        return reports

    def test_rows_plus_summary_structure(self, tmp_path):
        reports = self._batch(13)
        path = tmp_path / "batch.csv"
        write_batch_csv(reports, path)
        with open(path) as f:
            rows = list(csv.DictReader(f))
        assert [r["case_id"] for r in rows[:13]] == [f"case{i:02d}" for i in range(13)]
        assert [r["case_id"] for r in rows[13:]] == ["min", "max", "mean", "std"]
        assert list(rows[0].keys()) == list(CSV_COLUMNS)

    def test_summary_matches_independent_recomputation(self, tmp_path):
        reports = self._batch(13)
        path = tmp_path / "batch.csv"
        write_batch_csv(reports, path)
        with open(path) as f:
            rows = list(csv.DictReader(f))
        data_rows, summary_rows = rows[:13], {r["case_id"]: r for r in rows[13:]}
        for col in ("vol_manual_cm3", "vol_alg_cm3", "hd_voxel", "dsc_pct", "time_min"):
            vals = [float(r[col]) for r in data_rows]
            mean = sum(vals) / len(vals)
            std = math.sqrt(sum((v - mean) ** 2 for v in vals) / (len(vals) - 1))
            assert float(summary_rows["min"][col]) == pytest.approx(min(vals), abs=1e-9)
            assert float(summary_rows["max"][col]) == pytest.approx(max(vals), abs=1e-9)
            assert float(summary_rows["mean"][col]) == pytest.approx(mean, abs=1e-9)
            assert float(summary_rows["std"][col]) == pytest.approx(std, abs=1e-9)

    def test_summarize_handles_missing_timing(self):
        rng = np.random.default_rng(9)
        a, b = random_pair(rng)
        a.data[0, 0, 0] = b.data[0, 0, 0] = 1
        stats = summarize([evaluate(a, b)])
        assert "time_min" not in stats
        assert stats["dsc_pct"]["std"] == 0.0
