"""ANSF binary snapshots and CSV output.

ANSF record layout (little-endian)::

    b"ANSF"  uint32 version  uint32 n1 n2 n3  float64 L1 L2 L3
    complex coefficients as interleaved (re, im) float64,
    m3 index fastest, then m2, then m1 (FFT order on every axis)

A vector field is written as three consecutive records.
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from ansflow.spectral import Grid, SpectralField, VectorField

MAGIC = b"ANSF"
VERSION = 1
_HEADER = struct.Struct("<4sIIII3d")


class ANSFError(ValueError):
    pass


def _encode(field: SpectralField) -> bytes:
    g = field.grid
    head = _HEADER.pack(MAGIC, VERSION, g.n1, g.n2, g.n3, g.L1, g.L2, g.L3)
    body = np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes()
    return head + body


def write_ansf(path, field) -> None:
    comps = field.components if isinstance(field, VectorField) else (field,)
    with open(path, "wb") as fh:
        for c in comps:
            fh.write(_encode(c))


def read_ansf(path) -> list:
    """Read every record in an ANSF file; returns a list of SpectralFields."""
    data = Path(path).read_bytes()
    out = []
    pos = 0
    while pos < len(data):
        if len(data) - pos < _HEADER.size:
            raise ANSFError("truncated header")
        magic, version, n1, n2, n3, L1, L2, L3 = _HEADER.unpack_from(data, pos)
        if magic != MAGIC:
            raise ANSFError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ANSFError(f"unsupported version {version}")
        pos += _HEADER.size
        count = n1 * n2 * n3
        nbytes = 16 * count
        if len(data) - pos < nbytes:
            raise ANSFError("truncated coefficient block")
        coeffs = np.frombuffer(data, dtype="<c16", count=count, offset=pos)
        pos += nbytes
        grid = Grid(n1, n2, n3, L1, L2, L3)
        c = coeffs.reshape(grid.shape).astype(complex)
        out.append(SpectralField(grid, c, real=_is_conjugate_symmetric(c)))
    return out


def read_vector(path, divergence_free=False) -> VectorField:
    comps = read_ansf(path)
    if len(comps) != 3:
        raise ANSFError(f"expected 3 records, found {len(comps)}")
    return VectorField.from_components(*comps, divergence_free=divergence_free)


def _is_conjugate_symmetric(c: np.ndarray, tol=1e-12) -> bool:
    flipped = np.conj(np.roll(c[::-1, ::-1, ::-1], shift=1, axis=(0, 1, 2)))
    scale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
    return bool(np.max(np.abs(c - flipped)) <= tol * scale)


def format_float(x) -> str:
    return repr(float(x)) if not np.isfinite(x) else f"{float(x):.17g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
