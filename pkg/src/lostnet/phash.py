"""DCT perceptual hashing and Hamming-distance ranking.

Pipeline: BT.601 luminance -> exact area-averaged downscale to 32x32 ->
orthonormal type-II 2-D DCT -> keep the low-frequency 8x8 corner -> one
bit per coefficient, set iff it exceeds the mean of all 64 (DC included).
Bit order is the row-major scan of the block, most significant bit first;
hashes print as 16 lowercase hex characters.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .imageio import decode_rgb
from .tensor.types import ShapeError

HASH_BITS = 64
HASH_SIZE = 32  # downscale target before the DCT
BLOCK = 8  # retained low-frequency block

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def to_luminance(rgb: np.ndarray) -> np.ndarray:
    """(H, W, 3) image (uint8 or [0,1] floats) -> (H, W) float64 in [0,1]."""
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeError(f"expected (H, W, 3) image, got shape {arr.shape}")
    if np.asarray(rgb).dtype == np.uint8:
        arr = arr / 255.0
    w = np.asarray(LUMA_WEIGHTS)
    return arr @ w


@lru_cache(maxsize=None)
def _area_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) matrix whose rows average input cells over each output cell."""
    w = np.zeros((n_out, n_in))
    cell = n_in / n_out
    for i in range(n_out):
        start = i * cell
        end = (i + 1) * cell
        lo = int(np.floor(start))
        hi = int(np.ceil(end))
        for r in range(lo, min(hi, n_in)):
            overlap = min(end, r + 1) - max(start, r)
            if overlap > 0:
                w[i, r] = overlap / cell
    return w


def area_resize(gray: np.ndarray, out_h: int = HASH_SIZE, out_w: int = HASH_SIZE) -> np.ndarray:
    """Exact area-averaged downscale of a 2-D array."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2 or gray.shape[0] == 0 or gray.shape[1] == 0:
        raise ShapeError(f"expected a nonempty 2-D image, got shape {gray.shape}")
    wr = _area_weights(gray.shape[0], out_h)
    wc = _area_weights(gray.shape[1], out_w)
    return wr @ gray @ wc.T


def preprocess(source) -> np.ndarray:
    """Bytes or an (H, W, 3) array -> 32x32 luminance grid in [0,1]."""
    if isinstance(source, (bytes, bytearray)):
        rgb = decode_rgb(bytes(source))
    else:
        rgb = np.asarray(source)
    return area_resize(to_luminance(rgb))


@lru_cache(maxsize=None)
def _dct_matrix(n: int) -> np.ndarray:
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    d = np.cos(np.pi * (2 * m + 1) * k / (2 * n))
    d *= np.sqrt(2.0 / n)
    d[0] /= np.sqrt(2.0)
    return d


def dct2d(gray: np.ndarray) -> np.ndarray:
    """Orthonormal type-II 2-D DCT of a 32x32 grid; coefficient (0,0) is DC."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.shape != (HASH_SIZE, HASH_SIZE):
        raise ShapeError(f"dct2d expects {HASH_SIZE}x{HASH_SIZE}, got shape {gray.shape}")
    d = _dct_matrix(HASH_SIZE)
    return d @ gray @ d.T


def phash_compute(source) -> int:
    """64-bit perceptual hash of an image (bytes or (H, W, 3) array)."""
    coeffs = dct2d(preprocess(source))
    block = coeffs[:BLOCK, :BLOCK]
    mean = block.mean()
    bits = block > mean  # strict: a coefficient equal to the mean contributes 0
    h = 0
    for value in bits.ravel():
        h = (h << 1) | int(value)
    return h


def hash_to_hex(h: int) -> str:
    """16 lowercase hex characters."""
    if not 0 <= h < (1 << HASH_BITS):
        raise ValueError(f"hash {h!r} does not fit in {HASH_BITS} bits")
    return format(h, "016x")


def hash_from_hex(s: str) -> int:
    s = s.strip().lower()
    if len(s) != 16:
        raise ValueError(f"hash hex must be 16 characters, got {s!r}")
    return int(s, 16)


def hamming(a: int, b: int) -> int:
    """Number of differing bits between two 64-bit hashes."""
    return ((a ^ b) & ((1 << HASH_BITS) - 1)).bit_count()


def rank_by_similarity(query: int, candidates, top_k: int):
    """Candidates ``(id, hash)`` sorted ascending by distance, ties by id."""
    if top_k < 0:
        raise ValueError(f"top_k must be nonnegative, got {top_k}")
    ranked = sorted(
        ((item_id, hamming(query, h)) for item_id, h in candidates),
        key=lambda pair: (pair[1], pair[0]),
    )
    return ranked[:top_k]
