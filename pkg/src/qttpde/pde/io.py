"""Solution export: binary train container and dense CSV dumps.

Container layout (little-endian):
    magic  b"QTT1"
    kind   uint8   (0 = vector train, 1 = operator)
    ncores uint32
    per core: ndim uint8, shape uint32[ndim]
    payload: float64 entries of every core, C order, in core order
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from ..tt import MatrixProductOperator, TensorTrain, tt_to_dense

MAGIC = b"QTT1"


def save_tt(obj, path) -> None:
    kind = 1 if isinstance(obj, MatrixProductOperator) else 0
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BI", kind, len(obj.cores)))
        for g in obj.cores:
            fh.write(struct.pack("<B", g.ndim))
            fh.write(struct.pack(f"<{g.ndim}I", *g.shape))
        for g in obj.cores:
            fh.write(np.ascontiguousarray(g, dtype="<f8").tobytes())


def load_tt(path):
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError("not a QTT container")
    kind, n = struct.unpack_from("<BI", data, 4)
    off = 9
    shapes = []
    for _ in range(n):
        (nd,) = struct.unpack_from("<B", data, off)
        off += 1
        shapes.append(struct.unpack_from(f"<{nd}I", data, off))
        off += 4 * nd
    cores = []
    for s in shapes:
        size = int(np.prod(s))
        cores.append(np.frombuffer(data, dtype="<f8", count=size, offset=off).reshape(s).astype(float))
        off += 8 * size
    if off != len(data):
        raise ValueError("trailing bytes in container")
    return MatrixProductOperator(cores) if kind == 1 else TensorTrain(cores)


def dump_csv(t: TensorTrain, path, axes, names=("x", "y")) -> None:
    """Dense CSV of a 1D or 2D solution; ``axes`` holds the coordinate arrays."""
    per_dim = t.n_cores // len(axes)
    if per_dim > 10:
        raise ValueError("CSV dumps are limited to 10 cores per dimension")
    v = tt_to_dense(t)
    grids = np.meshgrid(*axes, indexing="ij")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(names[: len(axes)]) + ["value"])
        for row in zip(*(g.reshape(-1) for g in grids), v):
            w.writerow([repr(float(a)) for a in row])
