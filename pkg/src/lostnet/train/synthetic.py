"""Procedurally generated texture/shape families for tests and demos.

Ten visually distinct families, one per class: smooth low-frequency
patterns with per-image jitter (frequency, phase, placement) so that
images within a family share a look but still hash apart. Values stay
below ~0.87 so a +10% brightness perturbation never clips.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..imageio import decode_rgb, encode_png, resize_bilinear
from .data import DEFAULT_CLASSES, DatasetManifest, write_classes, write_manifest

# (low tone color, high tone color) per family, all channels <= 0.87
FAMILY_COLORS = (
    ((0.10, 0.05, 0.05), (0.85, 0.30, 0.25)),
    ((0.05, 0.10, 0.05), (0.30, 0.85, 0.30)),
    ((0.05, 0.05, 0.12), (0.25, 0.35, 0.87)),
    ((0.10, 0.10, 0.04), (0.85, 0.80, 0.25)),
    ((0.10, 0.04, 0.10), (0.80, 0.30, 0.85)),
    ((0.04, 0.10, 0.10), (0.25, 0.82, 0.85)),
    ((0.12, 0.07, 0.03), (0.87, 0.55, 0.20)),
    ((0.06, 0.06, 0.06), (0.82, 0.82, 0.82)),
    ((0.03, 0.08, 0.05), (0.55, 0.85, 0.45)),
    ((0.08, 0.03, 0.06), (0.85, 0.45, 0.65)),
)


def _grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    coords = (np.arange(size) + 0.5) / size
    return np.meshgrid(coords, coords, indexing="xy")


def _pattern(family: int, rng: np.random.Generator, size: int) -> np.ndarray:
    u, v = _grid(size)
    if family == 0:  # horizontal stripes
        f = rng.integers(2, 5)
        return 0.5 + 0.5 * np.sin(2 * np.pi * (f * v + rng.uniform()))
    if family == 1:  # vertical stripes
        f = rng.integers(2, 5)
        return 0.5 + 0.5 * np.sin(2 * np.pi * (f * u + rng.uniform()))
    if family == 2:  # diagonal stripes
        f = rng.integers(2, 5)
        return 0.5 + 0.5 * np.sin(2 * np.pi * (f * (u + v) / 2 + rng.uniform()))
    if family == 3:  # coarse checkerboard
        m = rng.integers(3, 6)
        du, dv = rng.uniform(size=2)
        return ((np.floor(u * m + du) + np.floor(v * m + dv)) % 2).astype(float)
    if family == 4:  # filled disk
        cx, cy = 0.5 + rng.uniform(-0.08, 0.08, size=2)
        r = rng.uniform(0.22, 0.32)
        return (np.hypot(u - cx, v - cy) < r).astype(float)
    if family == 5:  # concentric rings
        f = rng.integers(3, 6)
        cx, cy = 0.5 + rng.uniform(-0.05, 0.05, size=2)
        return 0.5 + 0.5 * np.cos(2 * np.pi * f * np.hypot(u - cx, v - cy) / 0.5)
    if family == 6:  # radial gradient
        cx, cy = 0.5 + rng.uniform(-0.1, 0.1, size=2)
        d = np.hypot(u - cx, v - cy)
        return np.clip(1.0 - d / (0.75 + rng.uniform(-0.1, 0.1)), 0.0, 1.0)
    if family == 7:  # bright patch in one corner
        w = rng.uniform(0.35, 0.5)
        left = bool(rng.integers(2))
        top = bool(rng.integers(2))
        inside_u = u < w if left else u > 1 - w
        inside_v = v < w if top else v > 1 - w
        return (inside_u & inside_v).astype(float)
    if family == 8:  # half plane
        theta = rng.uniform(0, 2 * np.pi)
        b = rng.uniform(-0.1, 0.1)
        return (((u - 0.5) * np.cos(theta) + (v - 0.5) * np.sin(theta)) > b).astype(float)
    if family == 9:  # smooth blobs
        coarse = rng.normal(size=(5, 5))
        up = resize_bilinear(
            np.repeat(((coarse - coarse.min()) / np.ptp(coarse) * 255)[:, :, None], 3, axis=2).astype(np.uint8),
            size,
            size,
        )[:, :, 0].astype(float) / 255.0
        return up
    raise ValueError(f"unknown family {family}")


def family_image(family: int, index: int, size: int = 128, seed: int = 0) -> np.ndarray:
    """One deterministic (H, W, 3) uint8 image of the given family."""
    rng = np.random.default_rng([seed, family, index])
    p = _pattern(family, rng, size)[:, :, None]
    lo, hi = FAMILY_COLORS[family]
    rgb = np.asarray(lo) * (1.0 - p) + np.asarray(hi) * p
    return np.round(rgb * 255).astype(np.uint8)


def generate_corpus(
    root,
    per_class: int = 8,
    size: int = 128,
    seed: int = 0,
    classes: tuple[str, ...] = DEFAULT_CLASSES,
) -> DatasetManifest:
    """Write PNGs plus manifest.tsv and classes.txt under ``root``."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for family, cls in enumerate(classes):
        cls_dir = root / cls
        cls_dir.mkdir(exist_ok=True)
        for i in range(per_class):
            rel = f"{cls}/{i:03d}.png"
            (root / rel).write_bytes(encode_png(family_image(family, i, size, seed)))
            entries.append((rel, family))
    manifest = DatasetManifest(root=root, classes=tuple(classes), entries=tuple(entries))
    write_manifest(manifest, root / "manifest.tsv")
    write_classes(classes, root / "classes.txt")
    return manifest


def perturb_image(data: bytes, brightness: float = 1.1, scale: float = 0.5) -> bytes:
    """Brightness-scaled, downscaled copy of an encoded image (PNG out)."""
    rgb = decode_rgb(data).astype(np.float64)
    rgb = np.clip(rgb * brightness, 0, 255)
    h, w = rgb.shape[:2]
    out = resize_bilinear(
        np.round(rgb).astype(np.uint8), max(1, round(w * scale)), max(1, round(h * scale))
    )
    return encode_png(out)
