"""Self-describing tensor files and CSV exports.

Binary tensor file layout (all integers little-endian):

    bytes 0-3    magic ``b"RTNS"``
    byte  4      format version (1)
    byte  5      element kind: 0 = real float64, 1 = complex128
    bytes 6-7    order N as uint16
    next 8N      mode sizes as uint64
    rest         elements in column-major order (first index fastest),
                 float64 for real data, interleaved (re, im) float64 pairs
                 for complex data
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ShapeError
from .tensor_core import matricize, unvec, validate_shape, vec

MAGIC = b"RTNS"
VERSION = 1


def write_tensor(path, t: np.ndarray) -> None:
    t = np.asarray(t)
    dims = validate_shape(t.shape)
    is_complex = np.iscomplexobj(t)
    header = MAGIC + struct.pack("<BBH", VERSION, int(is_complex), len(dims))
    header += struct.pack(f"<{len(dims)}Q", *dims)
    dtype = "<c16" if is_complex else "<f8"
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(vec(t).astype(dtype).tobytes())


def read_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ShapeError(f"{path} is not a tensor file")
    version, kind, order = struct.unpack_from("<BBH", raw, 4)
    if version != VERSION:
        raise ShapeError(f"unsupported tensor file version {version}")
    dims = struct.unpack_from(f"<{order}Q", raw, 8)
    offset = 8 + 8 * order
    dtype = "<c16" if kind else "<f8"
    data = np.frombuffer(raw, dtype=dtype, offset=offset)
    if data.size != int(np.prod(dims)):
        raise ShapeError(f"{path}: header declares {dims} but holds {data.size} elements")
    return unvec(data.astype(np.complex128 if kind else np.float64), dims)


def write_matricized_csv(path, t: np.ndarray, n_row: int) -> None:
    """Write ``matricize(t, n_row)`` as one ``row,col,real,imag`` line per entry."""
    m = matricize(t, n_row)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "real", "imag"])
        for c in range(m.shape[1]):
            for r in range(m.shape[0]):
                z = complex(m[r, c])
                w.writerow([r, c, repr(z.real), repr(z.imag)])
