"""On-disk formats.

``.cmx`` container: a 24-byte header followed by the matrix body.

======  =======  ==============================================
offset  size     content
======  =======  ==============================================
0       8        magic; ``CMX`` + 5-byte kind tag (e.g. ``CMXENSEM``)
8       8        rows, unsigned little-endian
16      8        columns, unsigned little-endian
24      16*r*c   entries, row-major, little-endian float64 (re, im)
======  =======  ==============================================

Ensembles are ``M x W``, modulation codes ``omega x M`` (real +-1), filter
banks ``M x omega`` and sample vectors ``1 x omega``.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from pathlib import Path

import numpy as np

from cmux.errors import FormatError

__all__ = [
    "KINDS",
    "write_cmx",
    "read_cmx",
    "write_matrix_csv",
    "read_matrix_csv",
    "file_sha256",
]

KINDS = {
    "ensemble": b"CMXENSEM",
    "codes": b"CMXCODES",
    "filters": b"CMXFILTR",
    "samples": b"CMXSAMPL",
    "solution": b"CMXSOLUT",
}
_BY_MAGIC = {v: k for k, v in KINDS.items()}
_HEADER = struct.Struct("<8sQQ")


def write_cmx(path, array, kind: str = "ensemble") -> Path:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {sorted(KINDS)}")
    arr = np.atleast_2d(np.asarray(array, dtype=np.complex128))
    if arr.ndim != 2:
        raise ValueError("only 2-D arrays can be stored")
    path = Path(path)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(KINDS[kind], arr.shape[0], arr.shape[1]))
        f.write(np.ascontiguousarray(arr, dtype="<c16").tobytes())
    return path


def read_cmx(path, expect: str | None = None) -> tuple[str, np.ndarray]:
    """Return ``(kind, array)``; raise FormatError on any inconsistency."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, rows, cols = _HEADER.unpack_from(raw)
    kind = _BY_MAGIC.get(magic)
    if kind is None:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if expect is not None and kind != expect:
        raise FormatError(f"{path}: holds {kind}, expected {expect}")
    body = raw[_HEADER.size:]
    if len(body) != 16 * rows * cols:
        raise FormatError(f"{path}: body has {len(body)} bytes, header implies {16 * rows * cols}")
    arr = np.frombuffer(body, dtype="<c16").astype(np.complex128).reshape(rows, cols)
    return kind, arr


def write_matrix_csv(path, array) -> Path:
    """One row per signal with columns ``re_0,im_0,re_1,im_1,...``."""
    arr = np.atleast_2d(np.asarray(array, dtype=np.complex128))
    path = Path(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"{p}_{j}" for j in range(arr.shape[1]) for p in ("re", "im")])
        for row in arr:
            w.writerow([repr(float(v)) for z in row for v in (z.real, z.imag)])
    return path


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or len(rows[0]) % 2:
        raise FormatError(f"{path}: expected an even number of re/im columns")
    try:
        vals = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if vals.size == 0:
        return np.zeros((0, len(rows[0]) // 2), dtype=np.complex128)
    return vals[:, 0::2] + 1j * vals[:, 1::2]


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
