"""On-disk cache for grid eigendecompositions.

Binary layout of one entry (little endian)::

    magic      4 bytes   b"RKOC"
    version    uint32
    key_len    uint32
    key        key_len bytes of UTF-8 JSON (sorted keys)
    n_arrays   uint32
    per array: ndim uint32, shape ndim x uint64, then row-major float64 data

File names are the SHA-256 of the key JSON, so a lookup never depends on
directory listing order.
"""

import hashlib
import json
import logging
import os
import struct

import numpy as np

from app.core.constants import CACHE_DIR

logger = logging.getLogger(__name__)

MAGIC = b"RKOC"
VERSION = 1


def _key_bytes(key: dict) -> bytes:
    return json.dumps(key, sort_keys=True).encode("utf-8")


class OperatorCache:
    """Load-or-store cache of float64 arrays keyed by a JSON-serialisable dict."""

    def __init__(self, directory: str | None = None) -> None:
        self.directory = os.path.abspath(directory or CACHE_DIR)

    def path_for(self, key: dict) -> str:
        digest = hashlib.sha256(_key_bytes(key)).hexdigest()
        return os.path.join(self.directory, f"{digest}.bin")

    def load(self, key: dict) -> list[np.ndarray] | None:
        """Return the cached arrays for ``key`` or None on a miss or a stale entry."""
        path = self.path_for(key)
        if not os.path.exists(path):
            logger.debug("Cache miss for %s", key)
            return None
        with open(path, "rb") as fh:
            blob = fh.read()
        try:
            return _decode(blob, key)
        except (ValueError, struct.error) as exc:
            logger.warning("Ignoring unreadable cache entry '%s': %s", path, exc)
            return None

    def store(self, key: dict, arrays: list[np.ndarray]) -> str:
        os.makedirs(self.directory, exist_ok=True)
        path = self.path_for(key)
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(_encode(key, arrays))
        os.replace(tmp, path)
        logger.info("Cached %d arrays for %s at '%s'", len(arrays), key, path)
        return path


def _encode(key: dict, arrays: list[np.ndarray]) -> bytes:
    kb = _key_bytes(key)
    parts = [MAGIC, struct.pack("<II", VERSION, len(kb)), kb, struct.pack("<I", len(arrays))]
    for arr in arrays:
        arr = np.ascontiguousarray(arr, dtype="<f8")
        parts.append(struct.pack("<I", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


def _decode(blob: bytes, key: dict) -> list[np.ndarray]:
    if blob[:4] != MAGIC:
        raise ValueError("bad magic")
    version, key_len = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    offset = 12
    stored_key = blob[offset : offset + key_len]
    if stored_key != _key_bytes(key):
        raise ValueError("key mismatch")
    offset += key_len
    (count,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    arrays = []
    for _ in range(count):
        (ndim,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        shape = struct.unpack_from(f"<{ndim}Q", blob, offset)
        offset += 8 * ndim
        size = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(blob, dtype="<f8", count=size, offset=offset).reshape(shape)
        offset += 8 * size
        arrays.append(arr.astype(float))
    return arrays
