"""Self-describing parameter checkpoints.

Layout: a magic line, the byte length of a JSON header, the header, then
every tensor as little-endian float64 in row-major order. The header maps
parameter path -> (shape, byte offset) and carries the model config plus
any normalisation metadata. Writing is deterministic, so identical params
give identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from ..numerics import Tensor

MAGIC = b"LOCATFT-CHECKPOINT v1\n"


def save_checkpoint(path, params: dict[str, Tensor], config: dict, metadata: dict | None = None) -> None:
    entries = []
    offset = 0
    for name, t in params.items():
        entries.append({"name": name, "shape": list(t.shape), "offset": offset})
        offset += t.size * 8
    header = {"config": config, "metadata": metadata or {}, "tensors": entries}
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(f"{len(blob)}\n".encode())
        fh.write(blob)
        for t in params.values():
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())


def load_checkpoint(path, requires_grad: bool = True) -> tuple[dict[str, Tensor], dict, dict[str, Any]]:
    """Return (params, config dict, metadata)."""
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise ValueError(f"{path}: not a checkpoint file")
    rest = raw[len(MAGIC):]
    nl = rest.index(b"\n")
    n = int(rest[:nl])
    header = json.loads(rest[nl + 1:nl + 1 + n])
    body = rest[nl + 1 + n:]
    params = {}
    for e in header["tensors"]:
        shape = tuple(e["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(body, dtype="<f8", count=count, offset=e["offset"]).reshape(shape)
        params[e["name"]] = Tensor(arr.astype(np.float64), requires_grad=requires_grad)
    return params, header["config"], header["metadata"]
