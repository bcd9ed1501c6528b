"""Single-file container: a JSON header describing named float/int arrays,
followed by their raw little-endian bytes. Round-trips are bit-exact, which
checkpoint resume relies on."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

_MAGIC = b"GQNB"
_SUPPORTED_DTYPES = {"<f8", "<i8", "<u8"}


def _canonical_dtype(arr: np.ndarray) -> str:
    kind = arr.dtype.kind
    if kind == "f":
        return "<f8"
    if kind == "i":
        return "<i8"
    if kind == "u":
        return "<u8"
    raise TypeError(f"unsupported array dtype {arr.dtype!r}")


def save_blob(path: str | Path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    """Write `meta` (JSON-serializable) plus named arrays to one file."""
    entries = []
    payloads = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        dtype = _canonical_dtype(arr)
        arr = arr.astype(dtype, copy=False)
        entries.append({"name": name, "dtype": dtype, "shape": list(arr.shape)})
        payloads.append(arr.tobytes(order="C"))
    header = json.dumps({"meta": meta, "arrays": entries}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for payload in payloads:
            fh.write(payload)


def load_blob(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a file written by save_blob; returns (meta, arrays)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a checkpoint container (bad magic {magic!r})")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        arrays: dict[str, np.ndarray] = {}
        for entry in header["arrays"]:
            dtype = entry["dtype"]
            if dtype not in _SUPPORTED_DTYPES:
                raise ValueError(f"{path}: unsupported dtype {dtype!r} in header")
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ValueError(f"{path}: truncated payload for array {entry['name']!r}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return header["meta"], arrays
