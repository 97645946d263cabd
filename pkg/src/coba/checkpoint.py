"""Flat binary tensor file: named float64 arrays plus a JSON meta block.

Layout: magic, 8-byte little-endian header length, UTF-8 JSON header, then
raw row-major tensor bytes in header order. No timestamps or compression, so
identical tensors always produce identical files.
"""

from __future__ import annotations

import json
import struct

import numpy as np

__all__ = ["save_tensors", "load_tensors", "CheckpointError"]

MAGIC = b"CBTENS1\n"


class CheckpointError(ValueError):
    pass


def save_tensors(path, tensors: dict, meta: dict = None):
    entries = []
    offset = 0
    arrays = []
    for name in tensors:
        arr = np.ascontiguousarray(tensors[name], dtype="<f8")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.nbytes
        arrays.append(arr)
    header = json.dumps({"tensors": entries, "meta": meta or {}}, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for arr in arrays:
            fh.write(arr.tobytes())


def load_tensors(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a tensor checkpoint")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode())
        blob = fh.read()
    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=start).reshape(shape)
        tensors[entry["name"]] = arr.copy()
    return tensors, header.get("meta", {})
