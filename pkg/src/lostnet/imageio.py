"""Raster decode/encode helpers (PNG and baseline JPEG via Pillow)."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError


class ImageDecodeError(ValueError):
    """The byte stream is not a decodable raster image."""


def decode_rgb(data: bytes) -> np.ndarray:
    """Decode image bytes into an (H, W, 3) uint8 array."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            return np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageDecodeError(f"cannot decode image: {exc}") from exc


def load_rgb(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_rgb(f.read())


def encode_png(arr: np.ndarray) -> bytes:
    """Encode an (H, W, 3) uint8 array as PNG bytes."""
    buf = io.BytesIO()
    Image.fromarray(np.asarray(arr, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def resize_bilinear(arr: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize of an (H, W, 3) uint8 array."""
    img = Image.fromarray(np.asarray(arr, dtype=np.uint8))
    return np.asarray(img.resize((width, height), Image.BILINEAR))


def sniff_media_type(data: bytes) -> str:
    if data.startswith(b"\x89PNG\r\n\x1a\n"):
        return "image/png"
    if data.startswith(b"\xff\xd8"):
        return "image/jpeg"
    return "application/octet-stream"
