"""Dataset manifests, the 70/30 split, and image ingestion.

Manifest file: UTF-8 text, header ``lostnet-manifest v1``, then one
``class_index<TAB>relative_path`` line per image. Class names live in a
companion ``classes.txt``, one per line, index = line number.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..imageio import load_rgb, decode_rgb, resize_bilinear

MANIFEST_HEADER = "lostnet-manifest v1"

DEFAULT_CLASSES = (
    "bag",
    "book",
    "card",
    "earphone",
    "key",
    "lipstick",
    "Phone",
    "umbrella",
    "USBflashdisk",
    "vacuumcup",
)

DEFAULT_NORM_MEAN = (0.485, 0.456, 0.406)
DEFAULT_NORM_STD = (0.229, 0.224, 0.225)


class ManifestError(ValueError):
    """Malformed manifest content or an invalid split request."""


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    classes: tuple[str, ...]
    entries: tuple[tuple[str, int], ...]  # (relative path, class index)

    def __post_init__(self):
        seen = set()
        for path, idx in self.entries:
            if not 0 <= idx < len(self.classes):
                raise ManifestError(f"class index {idx} out of range for {path!r}")
            if path in seen:
                raise ManifestError(f"duplicate manifest path {path!r}")
            seen.add(path)

    def __len__(self) -> int:
        return len(self.entries)

    def by_class(self) -> dict[int, list[str]]:
        grouped: dict[int, list[str]] = {i: [] for i in range(len(self.classes))}
        for path, idx in self.entries:
            grouped[idx].append(path)
        return grouped


def write_classes(classes, path) -> None:
    Path(path).write_text("".join(f"{c}\n" for c in classes), encoding="utf-8")


def read_classes(path) -> tuple[str, ...]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    classes = tuple(line.strip() for line in lines if line.strip())
    if not classes:
        raise ManifestError(f"no class names in {path}")
    return classes


def write_manifest(manifest: DatasetManifest, path) -> None:
    lines = [MANIFEST_HEADER]
    lines += [f"{idx}\t{rel}" for rel, idx in manifest.entries]
    Path(path).write_text("".join(f"{l}\n" for l in lines), encoding="utf-8")


def read_manifest(path, classes: tuple[str, ...], root: Path | None = None) -> DatasetManifest:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        raise ManifestError(f"missing manifest header {MANIFEST_HEADER!r} in {path}")
    entries = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            idx_s, rel = line.split("\t", 1)
            entries.append((rel, int(idx_s)))
        except ValueError as exc:
            raise ManifestError(f"malformed manifest line {ln}: {line!r}") from exc
    return DatasetManifest(
        root=root if root is not None else path.parent,
        classes=classes,
        entries=tuple(entries),
    )


def split_dataset(manifest: DatasetManifest, seed: int) -> tuple[DatasetManifest, DatasetManifest]:
    """Per-class 70/30 split: 70% rounded to nearest, at least one image on
    each side, deterministic under the seed, disjoint and exhaustive."""
    rng = np.random.default_rng(seed)
    train_entries: list[tuple[str, int]] = []
    val_entries: list[tuple[str, int]] = []
    grouped = manifest.by_class()
    for idx in range(len(manifest.classes)):
        paths = grouped[idx]
        if len(paths) < 2:
            raise ManifestError(
                f"class {manifest.classes[idx]!r} has {len(paths)} entries; "
                "need at least 2 to split"
            )
        order = rng.permutation(len(paths))
        n_train = int(len(paths) * 0.7 + 0.5)  # round half up
        n_train = min(max(n_train, 1), len(paths) - 1)
        for pos, j in enumerate(order):
            (train_entries if pos < n_train else val_entries).append((paths[j], idx))
    make = lambda entries: DatasetManifest(manifest.root, manifest.classes, tuple(entries))
    return make(train_entries), make(val_entries)


class ImagePreprocessor:
    """decode -> bilinear resize -> scale to [0,1] -> per-channel normalize -> CHW."""

    def __init__(
        self,
        resolution: int,
        mean: tuple[float, float, float] = DEFAULT_NORM_MEAN,
        std: tuple[float, float, float] = DEFAULT_NORM_STD,
        dtype=np.float32,
    ):
        self.resolution = resolution
        self.mean = np.asarray(mean, dtype=np.float64).reshape(3, 1, 1)
        self.std = np.asarray(std, dtype=np.float64).reshape(3, 1, 1)
        self.dtype = dtype

    def from_array(self, rgb: np.ndarray) -> np.ndarray:
        """(H, W, 3) uint8 -> normalized (3, R, R)."""
        if rgb.shape[:2] != (self.resolution, self.resolution):
            rgb = resize_bilinear(rgb, self.resolution, self.resolution)
        chw = rgb.astype(np.float64).transpose(2, 0, 1) / 255.0
        return ((chw - self.mean) / self.std).astype(self.dtype)

    def from_bytes(self, data: bytes) -> np.ndarray:
        return self.from_array(decode_rgb(data))

    def load_manifest(self, manifest: DatasetManifest) -> tuple[np.ndarray, np.ndarray]:
        """Decode every manifest entry; returns (N,3,R,R) inputs and int64 labels."""
        if len(manifest) == 0:
            raise ManifestError("manifest is empty")
        xs = np.empty((len(manifest), 3, self.resolution, self.resolution), dtype=self.dtype)
        ys = np.empty(len(manifest), dtype=np.int64)
        for i, (rel, idx) in enumerate(manifest.entries):
            xs[i] = self.from_array(load_rgb(Path(manifest.root) / rel))
            ys[i] = idx
        return xs, ys
