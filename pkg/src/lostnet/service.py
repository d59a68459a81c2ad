"""HTTP search service: classify -> category filter -> hash rank -> top-k.

Routes (JSON responses carry ``schema_version``):
    POST /api/search            multipart image + optional top_k
    POST /api/items             multipart image + category + metadata
    GET  /api/items             optional ?category= filter
    GET  /api/items/{id}        record
    GET  /api/items/{id}/image  stored image bytes
    GET  /api/categories        class list
    GET  /health                version, weights digest, backend
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Form, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import __version__, backend
from .imageio import ImageDecodeError, sniff_media_type
from .network.model import Network, NetworkSpec
from .network.weights_io import store_digest
from .phash import phash_compute, rank_by_similarity
from .registry import InvalidCategoryError, Registry, RegistryError
from .tensor import ops
from .train.data import ImagePreprocessor

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SearchMatch:
    item_id: int
    image_url: str
    distance: int
    description: str
    location: str


@dataclass(frozen=True)
class SearchResult:
    category: str
    confidence: float
    matches: tuple[SearchMatch, ...]


def classify_image(
    image_bytes: bytes,
    network: Network,
    preprocessor: ImagePreprocessor,
    classes,
) -> tuple[str, float, np.ndarray]:
    """Predicted class name, its softmax confidence, and the full vector."""
    x = preprocessor.from_bytes(image_bytes)[None]
    logits = network.forward(x, training=False).data[0]
    probs = ops.softmax(logits.astype(np.float64), axis=-1)
    idx = int(probs.argmax())
    return classes[idx], float(probs[idx]), probs


class SearchEngine:
    """The end-to-end pipeline behind the HTTP surface."""

    def __init__(self, network: Network, registry: Registry, preprocessor: ImagePreprocessor):
        self.network = network
        self.registry = registry
        self.preprocessor = preprocessor

    def classify(self, image_bytes: bytes) -> tuple[str, float, np.ndarray]:
        return classify_image(
            image_bytes, self.network, self.preprocessor, self.registry.classes
        )

    def search(self, image_bytes: bytes, top_k: int = 5) -> SearchResult:
        category, confidence, _ = self.classify(image_bytes)
        query_hash = phash_compute(image_bytes)
        candidates = [(r.id, r.hash) for r in self.registry.list_by_category(category)]
        ranked = rank_by_similarity(query_hash, candidates, top_k)
        matches = tuple(
            SearchMatch(
                item_id=item_id,
                image_url=f"/api/items/{item_id}/image",
                distance=distance,
                description=self.registry.get(item_id).description,
                location=self.registry.get(item_id).location,
            )
            for item_id, distance in ranked
        )
        return SearchResult(category=category, confidence=confidence, matches=matches)


def _json(payload: dict, status_code: int = 200) -> JSONResponse:
    return JSONResponse({"schema_version": SCHEMA_VERSION, **payload}, status_code=status_code)


def _error(message: str, status_code: int = 400) -> JSONResponse:
    return _json({"error": message}, status_code=status_code)


def _record_payload(record) -> dict:
    return record.to_json()


def create_app(
    spec: NetworkSpec,
    store: dict[str, np.ndarray],
    registry: Registry,
    preprocessor: ImagePreprocessor | None = None,
    static_dir: Path | None = None,
) -> FastAPI:
    network = Network(spec, store)
    if preprocessor is None:
        preprocessor = ImagePreprocessor(spec.input_resolution)
    engine = SearchEngine(network, registry, preprocessor)
    digest = store_digest(store)

    app = FastAPI(title="lostnet", version=__version__)
    app.state.engine = engine
    app.state.registry = registry

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request, exc):
        # keep the schema_version contract even for framework-level rejects
        return _error(f"malformed request: {exc.errors()[0].get('msg', 'invalid input')}", 400)

    @app.get("/health")
    def health():
        return _json(
            {
                "version": __version__,
                "weights_digest": digest,
                "backend": backend.active_backend(),
                "num_classes": len(registry.classes),
            }
        )

    @app.get("/api/categories")
    def categories():
        return _json({"categories": list(registry.classes)})

    @app.post("/api/items")
    async def register_item(
        image: UploadFile,
        category: str = Form(...),
        description: str = Form(""),
        location: str = Form(""),
    ):
        data = await image.read()
        try:
            record = registry.register(data, category, description, location)
        except (InvalidCategoryError, RegistryError, ImageDecodeError) as exc:
            return _error(str(exc))
        return _json({"item": _record_payload(record)})

    @app.get("/api/items")
    def list_items(category: str | None = None):
        if category is None:
            records = registry.all_records()
        else:
            try:
                records = registry.list_by_category(category)
            except InvalidCategoryError as exc:
                return _error(str(exc))
        return _json({"items": [_record_payload(r) for r in records]})

    @app.get("/api/items/{item_id}")
    def get_item(item_id: int):
        if item_id not in registry:
            return _error(f"no item with id {item_id}", status_code=404)
        return _json({"item": _record_payload(registry.get(item_id))})

    @app.get("/api/items/{item_id}/image")
    def get_item_image(item_id: int):
        if item_id not in registry:
            return _error(f"no item with id {item_id}", status_code=404)
        data = registry.read_image(item_id)
        return Response(content=data, media_type=sniff_media_type(data))

    @app.post("/api/search")
    async def search(image: UploadFile, top_k: int = Form(5)):
        if top_k < 0:
            return _error(f"top_k must be nonnegative, got {top_k}")
        data = await image.read()
        try:
            result = engine.search(data, top_k)
        except ImageDecodeError as exc:
            return _error(str(exc))
        return _json(
            {
                "category": result.category,
                "confidence": result.confidence,
                "matches": [
                    {
                        "item_id": m.item_id,
                        "image_url": m.image_url,
                        "distance": m.distance,
                        "description": m.description,
                        "location": m.location,
                    }
                    for m in result.matches
                ],
            }
        )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
