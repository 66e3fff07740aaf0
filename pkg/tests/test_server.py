import numpy as np
import pytest
from fastapi.testclient import TestClient

from formfunc.grids import VoxelGrid
from formfunc.server import create_app, rle_decode, rle_encode


@pytest.fixture(scope="module")
def client(small_pipeline):
    app = create_app(str(small_pipeline["checkpoint"]), str(small_pipeline["corpus"]))
    with TestClient(app) as c:
        yield c


def test_rle_round_trip():
    rng = np.random.default_rng(0)
    g = VoxelGrid(6, (rng.random((6, 6, 6)) < 0.4).astype(np.uint8))
    pairs = rle_encode(g)
    back = rle_decode(pairs, 6)
    assert np.array_equal(back.occupancy, g.occupancy)
    assert rle_decode(rle_encode(VoxelGrid.empty(4)), 4).occupied_count() == 0


def test_rle_rejects_bad_totals():
    with pytest.raises(ValueError):
        rle_decode([[0, 5]], 2)


def test_health(client):
    body = client.get("/health").json()
    assert body["schema_version"] == 1
    assert body["loaded"] is True


def test_unloaded_returns_503(tmp_path):
    app = create_app(str(tmp_path / "missing.ckpt"), str(tmp_path / "missing"))
    with TestClient(app) as c:
        assert c.get("/classes").status_code == 503
        r = c.post("/combine", json={"base": "tub", "top": "table"})
        assert r.status_code == 503


def test_classes_lists_corpus(client):
    body = client.get("/classes").json()
    assert body["schema_version"] == 1
    labels = [c["label"] for c in body["classes"]]
    assert labels == ["chair", "monitor", "table", "tub"]
    for c in body["classes"]:
        assert c["sample_count"] == 4
        assert c["affordances"]


def test_essence_known_label(client):
    body = client.get("/essence/chair").json()
    assert body["schema_version"] == 1
    assert body["dim"] == 16
    total = sum(c for _, c in body["grid"])
    assert total == 16**3
    hist = body["importance_histogram"]
    assert len(hist["counts"]) == 10
    assert len(hist["bin_edges"]) == 11


def test_essence_unknown_label_404(client):
    assert client.get("/essence/boat").status_code == 404


def test_essence_repeated_calls_identical(client):
    a = client.get("/essence/table").json()
    b = client.get("/essence/table").json()
    assert a == b


def test_essence_raw_probabilities(client):
    body = client.get("/essence/table", params={"raw": "true"}).json()
    assert len(body["probabilities"]) == 16**3
    assert all(0.0 <= p <= 1.0 for p in body["probabilities"][:64])


def test_combine_returns_grid_tests_and_neighbors(client):
    r = client.post(
        "/combine",
        json={"base": "tub", "top": "table", "base_percent": 0.5, "top_percent": 0.5},
    )
    assert r.status_code == 200
    body = r.json()
    assert body["schema_version"] == 1
    assert sum(c for _, c in body["grid"]) == 16**3
    report = body["affordance_report"]
    assert "supported_positions" in report["supportability"]
    assert report["containability"]["ratio"] >= 0
    assert len(body["nearest"]) == 2
    d0, d1 = (n["distance"] for n in body["nearest"])
    assert d0 <= d1


def test_combine_idempotent_on_same_label(client):
    a = client.post("/combine", json={"base": "tub", "top": "tub"}).json()
    essence = client.get("/essence/tub").json()
    assert a["grid"] == essence["grid"]


def test_combine_unknown_label_404(client):
    r = client.post("/combine", json={"base": "boat", "top": "table"})
    assert r.status_code == 404


def test_combine_bad_percent_422(client):
    r = client.post(
        "/combine", json={"base": "tub", "top": "table", "base_percent": 1.5}
    )
    assert r.status_code == 422


def test_concurrent_identical_requests_equal(client):
    bodies = [
        client.post("/combine", json={"base": "chair", "top": "monitor"}).json()
        for _ in range(2)
    ]
    assert bodies[0] == bodies[1]


def test_afford_test_endpoint(client):
    g = VoxelGrid.empty(12)
    g.occupancy[2:10, 0:3, 2:10] = 1
    r = client.post(
        "/afford-test",
        json={"mode": "support", "dim": 12, "grid": rle_encode(g)},
    )
    assert r.status_code == 200
    assert sum(r.json()["supported"]) > 0

    r2 = client.post(
        "/afford-test",
        json={"mode": "contain", "dim": 12, "grid": rle_encode(g)},
    )
    assert r2.status_code == 200
    assert r2.json()["ratio"] == 0.0

    r3 = client.post(
        "/afford-test", json={"mode": "fly", "dim": 12, "grid": rle_encode(g)}
    )
    assert r3.status_code == 422

    r4 = client.post("/afford-test", json={"mode": "support", "dim": 12, "grid": [[1, 3]]})
    assert r4.status_code == 422
