"""Binary weight container.

Layout (all little-endian): magic ``LNW1``, format version u32, tensor
count u32; then per tensor: name length u16 + UTF-8 name, dtype code u8
(0 = float32, 1 = float64), rank u8, extents as u32, raw values.
Round-trips are bit-exact.
"""

from __future__ import annotations

import hashlib
import io
import struct
from pathlib import Path
from typing import BinaryIO, Mapping

import numpy as np

from .model import NetworkSpec, validate_store

MAGIC = b"LNW1"
VERSION = 1

_DTYPE_TO_CODE = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
_CODE_TO_DTYPE = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


class WeightFormatError(ValueError):
    """Raised for malformed weight files."""


def _write(stream: BinaryIO, store: Mapping[str, np.ndarray]) -> None:
    stream.write(MAGIC)
    stream.write(struct.pack("<II", VERSION, len(store)))
    for name, arr in store.items():
        code = _DTYPE_TO_CODE.get(arr.dtype)
        if code is None:
            raise WeightFormatError(f"tensor {name!r} has unsupported dtype {arr.dtype}")
        encoded = name.encode("utf-8")
        stream.write(struct.pack("<H", len(encoded)))
        stream.write(encoded)
        stream.write(struct.pack("<BB", code, arr.ndim))
        stream.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        stream.write(np.ascontiguousarray(arr, dtype=_CODE_TO_DTYPE[code]).tobytes())


def save_weights(store: Mapping[str, np.ndarray], sink) -> None:
    """Write the store to a path or binary stream."""
    if hasattr(sink, "write"):
        _write(sink, store)
        return
    path = Path(sink)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        _write(f, store)
    tmp.replace(path)


def _read_exact(stream: BinaryIO, n: int, what: str) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise WeightFormatError(f"truncated weight file while reading {what}")
    return data


def load_weights(source, expect: NetworkSpec | None = None) -> dict[str, np.ndarray]:
    """Read a weight store; validates shapes against ``expect`` when given."""
    if hasattr(source, "read"):
        store = _read_store(source)
    else:
        with open(source, "rb") as f:
            store = _read_store(f)
    if expect is not None:
        validate_store(expect, store)
    return store


def _read_store(stream: BinaryIO) -> dict[str, np.ndarray]:
    magic = _read_exact(stream, 4, "magic")
    if magic != MAGIC:
        raise WeightFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version, count = struct.unpack("<II", _read_exact(stream, 8, "header"))
    if version != VERSION:
        raise WeightFormatError(f"unsupported format version {version}")
    store: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", _read_exact(stream, 2, "name length"))
        name = _read_exact(stream, name_len, "name").decode("utf-8")
        code, rank = struct.unpack("<BB", _read_exact(stream, 2, f"descriptor of {name!r}"))
        if code not in _CODE_TO_DTYPE:
            raise WeightFormatError(f"tensor {name!r} has unknown dtype code {code}")
        shape = struct.unpack(f"<{rank}I", _read_exact(stream, 4 * rank, f"shape of {name!r}"))
        dtype = _CODE_TO_DTYPE[code]
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        raw = _read_exact(stream, nbytes, f"values of {name!r}")
        if name in store:
            raise WeightFormatError(f"duplicate tensor name {name!r}")
        arr = np.frombuffer(raw, dtype=dtype).reshape(shape)
        store[name] = arr.astype(dtype.newbyteorder("="), copy=True)
    trailing = stream.read(1)
    if trailing:
        raise WeightFormatError("trailing bytes after the last tensor")
    return store


def store_digest(store: Mapping[str, np.ndarray]) -> str:
    """Stable sha256 hex digest of the serialized store."""
    buf = io.BytesIO()
    _write(buf, store)
    return hashlib.sha256(buf.getvalue()).hexdigest()
