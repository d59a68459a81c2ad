"""HTTP service surface via the in-process test client.

Uses a small random-weight network (32px) where classification quality is
irrelevant; the trained-model round trip lives in the acceptance suite.
"""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from lostnet.imageio import encode_png
from lostnet.network.model import build_network, init_weights
from lostnet.registry import Registry
from lostnet.service import create_app
from lostnet.train.data import ImagePreprocessor
from lostnet.train.synthetic import family_image

CLASSES = ("bag", "book", "card", "earphone", "key", "lipstick",
           "Phone", "umbrella", "USBflashdisk", "vacuumcup")


def png(fam=0, idx=0):
    return encode_png(family_image(fam, idx, size=48, seed=9))


@pytest.fixture
def client(tmp_path):
    spec = build_network(10, input_resolution=32)
    store = init_weights(spec, seed=0)
    registry = Registry(tmp_path / "store", CLASSES)
    app = create_app(spec, store, registry, ImagePreprocessor(32))
    with TestClient(app) as c:
        yield c


def upload(data, name="q.png"):
    return {"image": (name, data, "image/png")}


class TestHealthAndCategories:
    def test_health_payload(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        body = r.json()
        assert body["schema_version"] == 1
        assert len(body["weights_digest"]) == 64
        assert body["num_classes"] == 10

    def test_categories(self, client):
        body = client.get("/api/categories").json()
        assert body["schema_version"] == 1
        assert tuple(body["categories"]) == CLASSES


class TestItems:
    def test_register_and_fetch(self, client):
        r = client.post(
            "/api/items",
            files=upload(png(0, 0)),
            data={"category": "bag", "description": "tote", "location": "gate 4"},
        )
        assert r.status_code == 200
        item = r.json()["item"]
        assert item["id"] == 1 and item["category"] == "bag"
        assert len(item["hash"]) == 16

        got = client.get(f"/api/items/{item['id']}").json()["item"]
        assert got == item

    def test_item_image_bytes(self, client):
        data = png(1, 0)
        item = client.post(
            "/api/items", files=upload(data), data={"category": "book"}
        ).json()["item"]
        r = client.get(f"/api/items/{item['id']}/image")
        assert r.status_code == 200
        assert r.headers["content-type"] == "image/png"
        assert r.content == data

    def test_list_filter_by_category(self, client):
        for i in range(2):
            client.post("/api/items", files=upload(png(0, i)), data={"category": "bag"})
        client.post("/api/items", files=upload(png(1, 0)), data={"category": "key"})
        items = client.get("/api/items", params={"category": "bag"}).json()["items"]
        assert [i["category"] for i in items] == ["bag", "bag"]
        assert [i["id"] for i in items] == sorted(i["id"] for i in items)
        everything = client.get("/api/items").json()["items"]
        assert len(everything) == 3

    def test_invalid_category_400(self, client):
        r = client.post("/api/items", files=upload(png()), data={"category": "dragon"})
        assert r.status_code == 400
        assert "dragon" in r.json()["error"]

    def test_undecodable_image_400(self, client):
        r = client.post("/api/items", files=upload(b"nonsense"), data={"category": "bag"})
        assert r.status_code == 400
        assert "decode" in r.json()["error"]

    def test_missing_item_404(self, client):
        r = client.get("/api/items/999")
        assert r.status_code == 404
        assert r.json()["schema_version"] == 1

    def test_framework_validation_errors_keep_schema(self, client):
        r = client.post("/api/items", files=upload(png()))  # category missing
        assert r.status_code == 400
        body = r.json()
        assert body["schema_version"] == 1 and "malformed request" in body["error"]


class TestSearch:
    def test_empty_registry_reports_category_with_no_matches(self, client):
        r = client.post("/api/search", files=upload(png(3, 0)))
        assert r.status_code == 200
        body = r.json()
        assert body["category"] in CLASSES
        assert 0.0 <= body["confidence"] <= 1.0
        assert body["matches"] == []

    def test_self_match_at_distance_zero(self, client):
        data = png(4, 1)
        predicted = client.post("/api/search", files=upload(data)).json()["category"]
        client.post("/api/items", files=upload(data), data={"category": predicted})
        body = client.post("/api/search", files=upload(data)).json()
        assert body["category"] == predicted
        assert body["matches"][0]["distance"] == 0

    def test_matches_sorted_and_from_predicted_category(self, client):
        data = png(5, 0)
        predicted = client.post("/api/search", files=upload(data)).json()["category"]
        for i in range(4):
            client.post(
                "/api/items", files=upload(png(5, i)), data={"category": predicted}
            )
        body = client.post("/api/search", files=upload(data)).json()
        dists = [m["distance"] for m in body["matches"]]
        assert dists == sorted(dists)
        for m in body["matches"]:
            item = client.get(f"/api/items/{m['item_id']}").json()["item"]
            assert item["category"] == predicted

    def test_top_k_limits_matches(self, client):
        data = png(6, 0)
        predicted = client.post("/api/search", files=upload(data)).json()["category"]
        for i in range(5):
            client.post("/api/items", files=upload(png(6, i)), data={"category": predicted})
        body = client.post(
            "/api/search", files=upload(data), data={"top_k": "2"}
        ).json()
        assert len(body["matches"]) == 2

    def test_undecodable_search_image_400_with_diagnostic(self, client):
        r = client.post("/api/search", files=upload(b"not an image"))
        assert r.status_code == 400
        assert "decode" in r.json()["error"]

    def test_deterministic_classification(self, client):
        data = png(7, 0)
        a = client.post("/api/search", files=upload(data)).json()
        b = client.post("/api/search", files=upload(data)).json()
        assert a["category"] == b["category"]
        assert a["confidence"] == b["confidence"]

    def test_match_payload_shape(self, client):
        data = png(8, 0)
        predicted = client.post("/api/search", files=upload(data)).json()["category"]
        client.post(
            "/api/items",
            files=upload(data),
            data={"category": predicted, "description": "d", "location": "l"},
        )
        m = client.post("/api/search", files=upload(data)).json()["matches"][0]
        assert set(m) == {"item_id", "image_url", "distance", "description", "location"}
        assert m["image_url"] == f"/api/items/{m['item_id']}/image"
