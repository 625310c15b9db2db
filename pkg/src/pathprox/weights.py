"""PPRX1 weight files.

Layout, all little-endian: the 5 bytes ``PPRX1``, then ``n, m, p`` as
uint64, then ``V`` (n x p) and ``W`` (n x m) as row-major float64.
"""
from __future__ import annotations

import struct

import numpy as np

from .pathnorm import ShallowParams

MAGIC = b"PPRX1"
_HEADER = struct.Struct("<5sQQQ")


class WeightFileError(ValueError):
    pass


def save_weights(path, params: ShallowParams) -> None:
    n, m, p = params.hidden, params.inputs, params.outputs
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, m, p))
        fh.write(np.ascontiguousarray(params.V, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(params.W, dtype="<f8").tobytes())


def load_weights(path) -> ShallowParams:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise WeightFileError(f"{path}: truncated header")
    magic, n, m, p = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise WeightFileError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * (n * p + n * m)
    if len(blob) != expected:
        raise WeightFileError(f"{path}: expected {expected} bytes, found {len(blob)}")
    body = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    V = body[: n * p].reshape(n, p).astype(np.float64)
    W = body[n * p:].reshape(n, m).astype(np.float64)
    return ShallowParams(V, W)
