"""Binary model checkpoints.

Layout: ``MAGIC`` (8 bytes), format version (uint32 LE), header length
(uint32 LE), a UTF-8 JSON header with the architecture and the parameter
names/shapes in declared order, then every parameter as little-endian
float64 in that order.
"""
from __future__ import annotations

import json
from pathlib import Path
import struct

import numpy as np

from .model import Architecture, McMrConvModel

MAGIC = b"MCMRCONV"
VERSION = 1


def save_checkpoint(path: str | Path, model: McMrConvModel, extra: dict | None = None) -> None:
    header = {
        "architecture": model.arch.to_dict(),
        "flatten_order": "row-major",
        "params": [[k, list(v.shape)] for k, v in model.params.items()],
        "extra": extra or {},
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(hbytes)))
        fh.write(hbytes)
        for v in model.params.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[McMrConvModel, dict]:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: not a model checkpoint")
    version, hlen = struct.unpack("<II", data[8:16])
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    header = json.loads(data[16:16 + hlen].decode("utf-8"))
    if header.get("flatten_order") != "row-major":
        raise ValueError("unsupported flatten order")
    arch = Architecture.from_dict(header["architecture"])
    offset = 16 + hlen
    params = {}
    for name, shape in header["params"]:
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        params[name] = arr.astype(np.float64).reshape(shape)
        offset += 8 * count
    if offset != len(data):
        raise ValueError(f"{path}: trailing bytes after parameters")
    return McMrConvModel(arch, params), header["extra"]
