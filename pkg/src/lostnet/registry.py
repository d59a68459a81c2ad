"""Persistent store of registered lost/found items.

State lives in a line-delimited UTF-8 journal (header ``lostnet-journal
v1``, one JSON record per line) next to a content-addressed blob directory
``blobs/<first-2-hex>/<sha256>``. The journal is append-only; restore
replays it and, on a corrupt line, keeps the valid prefix and reports the
offending line number.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .imageio import decode_rgb
from .phash import hash_from_hex, hash_to_hex, phash_compute

log = logging.getLogger(__name__)

JOURNAL_HEADER = "lostnet-journal v1"
JOURNAL_NAME = "journal"
MAX_DESCRIPTION_BYTES = 2048
MAX_LOCATION_BYTES = 256


class RegistryError(ValueError):
    pass


class InvalidCategoryError(RegistryError):
    pass


@dataclass(frozen=True)
class ItemRecord:
    id: int
    category: str
    image_ref: str  # relative path into the blob store
    hash: int
    description: str
    location: str
    registered_at: int  # UTC seconds

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "category": self.category,
            "image_ref": self.image_ref,
            "hash": hash_to_hex(self.hash),
            "description": self.description,
            "location": self.location,
            "registered_at": self.registered_at,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ItemRecord":
        return cls(
            id=int(obj["id"]),
            category=str(obj["category"]),
            image_ref=str(obj["image_ref"]),
            hash=hash_from_hex(str(obj["hash"])),
            description=str(obj["description"]),
            location=str(obj["location"]),
            registered_at=int(obj["registered_at"]),
        )


class Registry:
    """Append-only item store; many readers, one locked writer."""

    def __init__(self, root, classes):
        self.root = Path(root)
        self.classes = tuple(classes)
        if not self.classes:
            raise RegistryError("registry needs a nonempty class list")
        self._lock = threading.Lock()
        self._records: list[ItemRecord] = []
        self._by_id: dict[int, ItemRecord] = {}
        self.corrupt_line: int | None = None
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "blobs").mkdir(exist_ok=True)
        self._journal_path = self.root / JOURNAL_NAME
        if self._journal_path.exists():
            self._replay()
        else:
            self._journal_path.write_text(JOURNAL_HEADER + "\n", encoding="utf-8")

    # -- restore ----------------------------------------------------------

    def _replay(self) -> None:
        text = self._journal_path.read_text(encoding="utf-8")
        lines = text.split("\n")
        if not lines or lines[0].strip() != JOURNAL_HEADER:
            raise RegistryError(
                f"journal {self._journal_path} missing header {JOURNAL_HEADER!r}"
            )
        for ln, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                record = ItemRecord.from_json(json.loads(line))
                self._validate_replayed(record)
            except (ValueError, KeyError, TypeError) as exc:
                self.corrupt_line = ln
                log.warning(
                    "journal %s corrupt at line %d (%s); keeping %d records",
                    self._journal_path, ln, exc, len(self._records),
                )
                break
            self._records.append(record)
            self._by_id[record.id] = record

    def _validate_replayed(self, record: ItemRecord) -> None:
        if record.category not in self.classes:
            raise RegistryError(f"unknown category {record.category!r}")
        if record.id in self._by_id:
            raise RegistryError(f"duplicate id {record.id}")
        if self._records and record.id <= self._records[-1].id:
            raise RegistryError(f"non-increasing id {record.id}")

    # -- writes -----------------------------------------------------------

    def _check_category(self, category: str) -> None:
        if category not in self.classes:
            raise InvalidCategoryError(
                f"unknown category {category!r}; valid categories: {', '.join(self.classes)}"
            )

    def _store_blob(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        rel = f"blobs/{digest[:2]}/{digest}"
        path = self.root / rel
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        return rel

    def register(
        self,
        image_bytes: bytes,
        category: str,
        description: str = "",
        location: str = "",
        timestamp: int | None = None,
    ) -> ItemRecord:
        self._check_category(category)
        if len(description.encode("utf-8")) > MAX_DESCRIPTION_BYTES:
            raise RegistryError(f"description exceeds {MAX_DESCRIPTION_BYTES} bytes")
        if len(location.encode("utf-8")) > MAX_LOCATION_BYTES:
            raise RegistryError(f"location exceeds {MAX_LOCATION_BYTES} bytes")
        decode_rgb(image_bytes)  # reject undecodable uploads before touching disk
        item_hash = phash_compute(image_bytes)
        with self._lock:
            image_ref = self._store_blob(image_bytes)
            record = ItemRecord(
                id=self._records[-1].id + 1 if self._records else 1,
                category=category,
                image_ref=image_ref,
                hash=item_hash,
                description=description,
                location=location,
                registered_at=int(time.time()) if timestamp is None else int(timestamp),
            )
            with open(self._journal_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
                f.flush()
            # readers only see the record once it is durably journaled
            self._records.append(record)
            self._by_id[record.id] = record
        return record

    # -- reads ------------------------------------------------------------

    def get(self, item_id: int) -> ItemRecord:
        try:
            return self._by_id[item_id]
        except KeyError:
            raise KeyError(f"no item with id {item_id}") from None

    def __contains__(self, item_id: int) -> bool:
        return item_id in self._by_id

    def __len__(self) -> int:
        return len(self._records)

    def all_records(self) -> list[ItemRecord]:
        return list(self._records)

    def list_by_category(self, category: str) -> list[ItemRecord]:
        """All records of the category, ascending id."""
        self._check_category(category)
        return [r for r in self._records if r.category == category]

    def image_path(self, record: ItemRecord) -> Path:
        return self.root / record.image_ref

    def read_image(self, item_id: int) -> bytes:
        return self.image_path(self.get(item_id)).read_bytes()


def persist(registry: Registry, sink) -> None:
    """Write the registry's full journal to a path (blobs are not copied)."""
    lines = [JOURNAL_HEADER]
    lines += [json.dumps(r.to_json(), ensure_ascii=False) for r in registry.all_records()]
    Path(sink).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def restore(root, classes) -> Registry:
    """Rebuild a registry by replaying the journal under ``root``."""
    return Registry(root, classes)
