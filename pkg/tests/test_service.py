import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from growcut3d.phantom import ellipsoid_phantom
from growcut3d.service.app import create_app
from growcut3d.service.rle import encode_rows
from growcut3d.strokes import rasterize_strokes

from oracles import decode_rle_rows

DIMS = (40, 40, 40)


@pytest.fixture
def session_volumes():
    return ellipsoid_phantom(DIMS, (11, 8, 8), 100, 50, noise_sigma=3, seed=21)


@pytest.fixture
def client(session_volumes):
    image, truth = session_volumes
    app = create_app(image=image, truth=truth)
    with TestClient(app) as c:
        yield c


@pytest.fixture
def bare_client():
    with TestClient(create_app(image=None)) as c:
        yield c


def stroke_payload(*strokes):
    return {"dims": list(DIMS), "strokes": list(strokes)}


def disc_stroke(label=1, axis="axial", index=20, radius=2.0, points=((20, 20),)):
    return {
        "label": label,
        "axis": axis,
        "slice_index": index,
        "brush_radius_voxels": radius,
        "polyline": [list(p) for p in points],
    }


def seed_for_segmentation(client):
    r = client.post("/api/seeds", json=stroke_payload(
        disc_stroke(label=1, radius=3.0, points=[(16, 20), (24, 20)]),
        disc_stroke(label=2, radius=1.5, points=[(4, 4), (36, 4)]),
        disc_stroke(label=2, radius=1.5, points=[(4, 36), (36, 36)]),
        disc_stroke(label=2, axis="sagittal", radius=1.5, points=[(4, 4), (36, 4)]),
        disc_stroke(label=2, axis="sagittal", radius=1.5, points=[(4, 36), (36, 36)]),
    ))
    assert r.status_code == 200, r.text
    return r.json()


class TestVolumeMeta:
    def test_dims_echoed_exactly(self, client, session_volumes):
        image, _ = session_volumes
        meta = client.get("/api/volume").json()
        assert tuple(meta["dims"]) == image.dims
        assert tuple(meta["spacing"]) == image.spacing

    def test_intensity_range_matches_full_scan(self, client, session_volumes):
        image, _ = session_volumes
        meta = client.get("/api/volume").json()
        assert meta["intensity_min"] == pytest.approx(float(image.data.min()))
        assert meta["intensity_max"] == pytest.approx(float(image.data.max()))

    def test_404_when_nothing_loaded(self, bare_client):
        assert bare_client.get("/api/volume").status_code == 404


class TestSlicePng:
    def test_window_spanning_range_maps_min_to_0_max_to_255(self, client, session_volumes):
        image, _ = session_volumes
        lo, hi = float(image.data.min()), float(image.data.max())
        k = int(np.unravel_index(image.data.argmin(), image.data.shape)[0])
        r = client.get(f"/api/slice/axial/{k}", params={
            "window": hi - lo, "level": (hi + lo) / 2,
        })
        assert r.status_code == 200
        assert r.headers["content-type"] == "image/png"
        img = np.asarray(Image.open(io.BytesIO(r.content)))
        assert img.shape == (DIMS[1], DIMS[0])
        slice_vals = image.data[k]
        assert img[slice_vals == lo].min() == 0 if (slice_vals == lo).any() else True
        expected = np.floor(np.clip((slice_vals - lo) / (hi - lo), 0, 1) * 255 + 0.5)
        assert np.array_equal(img, expected.astype(np.uint8))

    def test_deterministic_bytes(self, client):
        a = client.get("/api/slice/coronal/7").content
        b = client.get("/api/slice/coronal/7").content
        assert a == b

    def test_constant_slice_is_single_valued(self):
        from growcut3d.volume import ScalarVolume

        flat = ScalarVolume(data=np.full((8, 8, 8), 7.0, dtype=np.float32))
        with TestClient(create_app(image=flat)) as c:
            r = c.get("/api/slice/axial/3")
            img = np.asarray(Image.open(io.BytesIO(r.content)))
            assert len(np.unique(img)) == 1

    def test_bad_axis_and_index_are_400(self, client):
        assert client.get("/api/slice/oblique/0").status_code == 400
        assert client.get("/api/slice/axial/40").status_code == 400
        assert client.get("/api/slice/axial/0", params={"window": 0}).status_code == 400


class TestSeeds:
    def test_single_point_increments_fg_by_one(self, client):
        counts = client.post("/api/seeds", json=stroke_payload(
            disc_stroke(radius=0.0, points=[(10, 10)]),
        )).json()
        assert counts == {"foreground": 1, "background": 0}

    def test_same_stroke_twice_is_idempotent(self, client):
        payload = stroke_payload(disc_stroke(radius=2.0))
        first = client.post("/api/seeds", json=payload).json()
        second = client.post("/api/seeds", json=payload).json()
        assert first == second

    def test_counts_match_rasterization_oracle(self, client, session_volumes):
        image, _ = session_volumes
        payload = stroke_payload(
            disc_stroke(label=1, radius=2.5, points=[(12, 14), (25, 17)]),
            disc_stroke(label=2, axis="coronal", index=9, radius=1.0, points=[(8, 8)]),
        )
        counts = client.post("/api/seeds", json=payload).json()
        lv = rasterize_strokes(payload, image)
        assert counts["foreground"] == int((lv.data == 1).sum())
        assert counts["background"] == int((lv.data == 2).sum())

    def test_additive_across_requests_then_clearable(self, client):
        client.post("/api/seeds", json=stroke_payload(disc_stroke(points=[(5, 5)], radius=0.0)))
        counts = client.post("/api/seeds", json=stroke_payload(
            disc_stroke(label=2, points=[(30, 30)], radius=0.0),
        )).json()
        assert counts == {"foreground": 1, "background": 1}
        cleared = client.delete("/api/seeds").json()
        assert cleared == {"foreground": 0, "background": 0}

    def test_out_of_bounds_stroke_is_422(self, client):
        r = client.post("/api/seeds", json=stroke_payload(
            disc_stroke(points=[(100, 100)]),
        ))
        assert r.status_code == 422
        assert "stroke 0" in r.json()["detail"]

    def test_dims_mismatch_is_422(self, client):
        payload = stroke_payload(disc_stroke())
        payload["dims"] = [8, 8, 8]
        assert client.post("/api/seeds", json=payload).status_code == 422


class TestSegment:
    def test_phantom_session_converges(self, client):
        seed_for_segmentation(client)
        r = client.post("/api/segment", json={})
        assert r.status_code == 200, r.text
        body = r.json()
        assert body["converged"] is True
        assert body["foreground_voxels"] > 0

    def test_no_seeds_is_422(self, client):
        assert client.post("/api/segment", json={}).status_code == 422

    def test_identical_seeds_identical_checksum(self, client):
        seed_for_segmentation(client)
        first = client.post("/api/segment", json={}).json()
        second = client.post("/api/segment", json={}).json()
        assert first["mask_sha256"] == second["mask_sha256"]

    def test_busy_session_answers_409(self, session_volumes):
        image, truth = session_volumes
        app = create_app(image=image, truth=truth)
        with TestClient(app) as c:
            app.state.session.lock.acquire()
            try:
                assert c.post("/api/segment", json={}).status_code == 409
            finally:
                app.state.session.lock.release()


class TestMaskSlices:
    def test_rle_round_trips_against_mask(self, client):
        seed_for_segmentation(client)
        summary = client.post("/api/segment", json={}).json()
        assert summary["converged"]
        fg_total = 0
        for k in range(DIMS[2]):
            body = client.get(f"/api/mask/slice/axial/{k}").json()
            decoded = decode_rle_rows(body["rows"], body["width"])
            fg_total += int(decoded.sum())
            assert decoded.shape == (body["height"], body["width"])
        assert fg_total == summary["foreground_voxels"]

    def test_empty_slice_is_single_zero_run(self, client):
        seed_for_segmentation(client)
        client.post("/api/segment", json={})
        body = client.get("/api/mask/slice/axial/0").json()
        assert all(runs == [DIMS[0]] for runs in body["rows"])

    def test_full_and_empty_row_encodings(self):
        rows = encode_rows(np.array([[1, 1, 1, 1], [0, 0, 0, 0], [0, 1, 1, 0]], dtype=np.uint8))
        assert rows == [[0, 4], [4], [1, 2, 1]]

    def test_random_rows_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            binary = (rng.random((9, 17)) < 0.4).astype(np.uint8)
            assert np.array_equal(decode_rle_rows(encode_rows(binary), 17), binary)

    def test_404_before_any_segmentation(self, client):
        assert client.get("/api/mask/slice/axial/0").status_code == 404


class TestPostAndMetrics:
    def test_islands_leaves_one_component(self, client, session_volumes):
        seed_for_segmentation(client)
        client.post("/api/segment", json={})
        r = client.post("/api/post", json={"ops": "islands"})
        assert r.status_code == 200
        from growcut3d.morphology import connected_components

        app_session = client.app.state.session
        _, sizes = connected_components(app_session.mask)
        assert len(sizes) == 1

    def test_metrics_against_truth(self, client):
        seed_for_segmentation(client)
        client.post("/api/segment", json={})
        client.post("/api/post", json={"ops": "islands,dilate:1,erode:1"})
        body = client.get("/api/metrics").json()
        assert body["dsc"] >= 0.9
        assert body["voxels_intersection"] <= min(body["voxels_a"], body["voxels_r"])

    def test_metrics_dsc_one_when_truth_equals_mask(self, session_volumes):
        image, truth = session_volumes
        app = create_app(image=image, truth=truth)
        with TestClient(app) as c:
            app.state.session.mask = truth
            body = c.get("/api/metrics").json()
            assert body["dsc"] == 1.0
            assert body["hausdorff_voxel"] == 0.0

    def test_metrics_without_truth_is_404(self, session_volumes):
        image, _ = session_volumes
        with TestClient(create_app(image=image)) as c:
            c.app.state.session.mask = c.app.state.session.seed_volume()
            assert c.get("/api/metrics").status_code == 404

    def test_post_without_mask_is_404_and_bad_ops_422(self, client):
        assert client.post("/api/post", json={"ops": "islands"}).status_code == 404
        seed_for_segmentation(client)
        client.post("/api/segment", json={})
        assert client.post("/api/post", json={"ops": "sharpen"}).status_code == 422


class TestParityWithCli:
    def test_api_seed_state_equals_cli_rasterization(self, client, session_volumes):
        image, _ = session_volumes
        batches = [
            stroke_payload(disc_stroke(label=1, radius=2.0, points=[(18, 20), (22, 20)])),
            stroke_payload(disc_stroke(label=2, radius=1.0, points=[(6, 6)])),
            stroke_payload(disc_stroke(label=1, axis="coronal", index=20, radius=1.5,
                                       points=[(20, 20)])),
        ]
        for batch in batches:
            assert client.post("/api/seeds", json=batch).status_code == 200
        combined = stroke_payload(*[s for b in batches for s in b["strokes"]])
        lv = rasterize_strokes(combined, image)
        session = client.app.state.session
        assert np.array_equal(session.seeds, lv.data)
