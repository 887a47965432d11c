"""Tensor trains (vectors) and matrix product operators over binary modes.

Bit ordering is big-endian everywhere: core 0 carries the most significant
bit of the grid index, so ``x = 0.x_1 x_2 ... x_c``.  Multi-dimensional
objects use serial ordering (all cores of dimension 1, then dimension 2, ...).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_DENSE_CAP = 26


def dense_cap() -> int:
    """Largest core count that may be densified (override with QTT_DENSE_CAP)."""
    return int(os.environ.get("QTT_DENSE_CAP", DEFAULT_DENSE_CAP))


@dataclass(frozen=True)
class Tolerance:
    rel_eps: float = 1e-12
    max_rank: Optional[int] = None

    def __post_init__(self):
        if self.rel_eps < 0:
            raise ValueError("rel_eps must be non-negative")
        if self.max_rank is not None and self.max_rank < 1:
            raise ValueError("max_rank must be >= 1")


def _freeze(cores, ndim):
    out = []
    for k, g in enumerate(cores):
        g = np.asarray(g)
        if g.ndim != ndim:
            raise ValueError(f"core {k} has ndim {g.ndim}, expected {ndim}")
        if not np.issubdtype(g.dtype, np.floating):
            g = g.astype(float)
        g.flags.writeable = False
        out.append(g)
    if not out:
        raise ValueError("a train needs at least one core")
    if out[0].shape[0] != 1 or out[-1].shape[-1] != 1:
        raise ValueError("boundary bonds must be 1")
    for k in range(len(out) - 1):
        if out[k].shape[-1] != out[k + 1].shape[0]:
            raise ValueError(f"bond mismatch between cores {k} and {k + 1}")
    return tuple(out)


class TensorTrain:
    """Compressed vector of length ``2**c`` stored as cores ``(r_left, 2, r_right)``."""

    __slots__ = ("cores",)

    def __init__(self, cores: Sequence[np.ndarray]):
        self.cores = _freeze(cores, 3)
        for g in self.cores:
            if g.shape[1] != 2:
                raise ValueError("mode sizes must be 2")

    @property
    def n_cores(self) -> int:
        return len(self.cores)

    @property
    def ranks(self) -> list[int]:
        return [1] + [g.shape[2] for g in self.cores]

    @property
    def max_rank(self) -> int:
        return max(self.ranks)

    def __len__(self):
        return self.n_cores

    def __repr__(self):
        return f"TensorTrain(c={self.n_cores}, ranks={self.ranks[1:-1]})"

    def __add__(self, other):
        return tt_add(self, other)

    def __sub__(self, other):
        return tt_add(self, tt_scale(other, -1.0))

    def __mul__(self, s):
        return tt_scale(self, s)

    __rmul__ = __mul__

    def __neg__(self):
        return tt_scale(self, -1.0)


class MatrixProductOperator:
    """Compressed ``2**c x 2**c`` matrix with cores ``(R_left, out, in, R_right)``."""

    __slots__ = ("cores",)

    def __init__(self, cores: Sequence[np.ndarray]):
        self.cores = _freeze(cores, 4)
        for g in self.cores:
            if g.shape[1] != 2 or g.shape[2] != 2:
                raise ValueError("mode sizes must be 2")

    @property
    def n_cores(self) -> int:
        return len(self.cores)

    @property
    def ranks(self) -> list[int]:
        return [1] + [g.shape[3] for g in self.cores]

    @property
    def max_rank(self) -> int:
        return max(self.ranks)

    def __len__(self):
        return self.n_cores

    def __repr__(self):
        return f"MatrixProductOperator(c={self.n_cores}, ranks={self.ranks[1:-1]})"

    def __add__(self, other):
        return mpo_add(self, other)

    def __sub__(self, other):
        return mpo_add(self, mpo_scale(other, -1.0))

    def __mul__(self, s):
        return mpo_scale(self, s)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, MatrixProductOperator):
            return mpo_compose(self, other)
        return mpo_apply(self, other)


def _check_same_length(a, b):
    if a.n_cores != b.n_cores:
        raise ValueError(f"core counts differ: {a.n_cores} vs {b.n_cores}")


# ---------------------------------------------------------------------------
# dense conversion


def tt_to_dense(t: TensorTrain, cap: Optional[int] = None) -> np.ndarray:
    cap = dense_cap() if cap is None else cap
    if t.n_cores > cap:
        raise MemoryError(
            f"dense materialization too large: 2**{t.n_cores} entries (cap 2**{cap})")
    out = t.cores[0].reshape(2, -1)
    for g in t.cores[1:]:
        r = g.shape[0]
        out = (out.reshape(-1, r) @ g.reshape(r, -1))
    return out.reshape(-1)


def mpo_to_dense(m: MatrixProductOperator, cap: Optional[int] = None) -> np.ndarray:
    cap = dense_cap() if cap is None else cap
    if 2 * m.n_cores > cap:
        raise MemoryError(
            f"dense materialization too large: 4**{m.n_cores} entries (cap 2**{cap})")
    c = m.n_cores
    # contract into (o1 i1 o2 i2 ... ) then reorder to (o1..oc, i1..ic)
    out = m.cores[0].reshape(4, -1)
    for g in m.cores[1:]:
        r = g.shape[0]
        out = out.reshape(-1, r) @ g.reshape(r, -1)
    out = out.reshape([2, 2] * c)
    perm = list(range(0, 2 * c, 2)) + list(range(1, 2 * c, 2))
    n = 2 ** c
    return out.transpose(perm).reshape(n, n)


def _truncation_rank(s: np.ndarray, abs_eps: float, max_rank: Optional[int]) -> int:
    """Smallest rank whose discarded tail has Frobenius norm <= abs_eps."""
    if s.size == 0:
        return 1
    tail = np.sqrt(np.cumsum(s[::-1] ** 2))[::-1]
    r = int(np.count_nonzero(tail > abs_eps))
    r = max(r, 1)
    if max_rank is not None:
        r = min(r, max_rank)
    return r


def _tt_svd(array: np.ndarray, c: int, mode: int, tol: Tolerance) -> list[np.ndarray]:
    norm = np.linalg.norm(array)
    if norm == 0.0:
        return [np.zeros((1, mode, 1)) for _ in range(c)]
    eps = tol.rel_eps * norm / np.sqrt(max(c - 1, 1))
    cores = []
    rest = array.reshape(1, -1)
    r = 1
    for _ in range(c - 1):
        rest = rest.reshape(r * mode, -1)
        u, s, vt = np.linalg.svd(rest, full_matrices=False)
        rn = _truncation_rank(s, eps, tol.max_rank)
        cores.append(u[:, :rn].reshape(r, mode, rn))
        rest = s[:rn, None] * vt[:rn]
        r = rn
    cores.append(rest.reshape(r, mode, 1))
    return cores


def _log2_length(n: int) -> int:
    if n < 2 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two >= 2")
    return n.bit_length() - 1


def tt_from_dense(v: np.ndarray, tol: Tolerance = Tolerance()) -> TensorTrain:
    """TT-SVD of a power-of-two length vector."""
    v = np.asarray(v, dtype=float).reshape(-1)
    c = _log2_length(v.size)
    return TensorTrain(_tt_svd(v, c, 2, tol))


def mpo_from_dense(m: np.ndarray, tol: Tolerance = Tolerance()) -> MatrixProductOperator:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    c = _log2_length(m.shape[0])
    t = m.reshape([2] * (2 * c))
    perm = [p for k in range(c) for p in (k, c + k)]
    t = t.transpose(perm).reshape(-1)
    cores = _tt_svd(t, c, 4, tol)
    return MatrixProductOperator([g.reshape(g.shape[0], 2, 2, g.shape[2]) for g in cores])


def tt_entry(t: TensorTrain, index: int) -> float:
    """Single entry by big-endian index without densifying."""
    c = t.n_cores
    v = np.ones(1)
    for k, g in enumerate(t.cores):
        bit = (index >> (c - 1 - k)) & 1
        v = v @ g[:, bit, :]
    return float(v[0])


def tt_entries(t: TensorTrain, indices: np.ndarray) -> np.ndarray:
    """Vectorized entry evaluation for an array of big-endian indices."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    c = t.n_cores
    v = np.ones((idx.size, 1))
    for k, g in enumerate(t.cores):
        bits = ((idx >> (c - 1 - k)) & 1).astype(bool)
        out = np.empty((idx.size, g.shape[2]))
        out[~bits] = v[~bits] @ g[:, 0, :]
        out[bits] = v[bits] @ g[:, 1, :]
        v = out
    return v[:, 0]


# ---------------------------------------------------------------------------
# vector arithmetic


def tt_zeros(c: int) -> TensorTrain:
    return TensorTrain([np.zeros((1, 2, 1)) for _ in range(c)])


def tt_ones(c: int) -> TensorTrain:
    return TensorTrain([np.ones((1, 2, 1)) for _ in range(c)])


def tt_add(a: TensorTrain, b: TensorTrain) -> TensorTrain:
    _check_same_length(a, b)
    c = a.n_cores
    if c == 1:
        return TensorTrain([a.cores[0] + b.cores[0]])
    cores = []
    for k, (x, y) in enumerate(zip(a.cores, b.cores)):
        if k == 0:
            cores.append(np.concatenate([x, y], axis=2))
        elif k == c - 1:
            cores.append(np.concatenate([x, y], axis=0))
        else:
            z = np.zeros((x.shape[0] + y.shape[0], 2, x.shape[2] + y.shape[2]))
            z[: x.shape[0], :, : x.shape[2]] = x
            z[x.shape[0]:, :, x.shape[2]:] = y
            cores.append(z)
    return TensorTrain(cores)


def tt_sum(terms: Iterable[TensorTrain], tol: Optional[Tolerance] = None) -> TensorTrain:
    terms = list(terms)
    out = terms[0]
    for t in terms[1:]:
        out = tt_add(out, t)
        if tol is not None:
            out = tt_round(out, tol)
    return out


def tt_scale(a: TensorTrain, s: float) -> TensorTrain:
    cores = list(a.cores)
    cores[0] = cores[0] * s
    return TensorTrain(cores)


def tt_inner(a: TensorTrain, b: TensorTrain) -> float:
    _check_same_length(a, b)
    env = np.ones((1, 1))
    for x, y in zip(a.cores, b.cores):
        env = np.einsum("ab,aic,bid->cd", env, x, y, optimize=True)
    return float(env[0, 0])


def tt_norm(a: TensorTrain) -> float:
    # left-orthogonalize; the norm lives in the final R factor
    r = np.ones((1, 1))
    for g in a.cores:
        g = np.tensordot(r, g, axes=(1, 0))
        m = g.reshape(-1, g.shape[2])
        _, r = np.linalg.qr(m)
    return float(abs(r[0, 0]))


def tt_hadamard(a: TensorTrain, b: TensorTrain) -> TensorTrain:
    _check_same_length(a, b)
    cores = []
    for x, y in zip(a.cores, b.cores):
        z = np.einsum("aib,cid->acibd", x, y)
        cores.append(z.reshape(x.shape[0] * y.shape[0], 2, x.shape[2] * y.shape[2]))
    return TensorTrain(cores)


def kron_concat(*trains: TensorTrain) -> TensorTrain:
    """Kronecker product: cores of the first train, then the next, ..."""
    cores = []
    for t in trains:
        cores.extend(t.cores)
    return TensorTrain(cores)


def _orthogonalize_right(cores: list[np.ndarray]) -> list[np.ndarray]:
    """Make cores 1..d-1 right-orthonormal; norm is carried by core 0."""
    cores = list(cores)
    for k in range(len(cores) - 1, 0, -1):
        g = cores[k]
        rl, n, rr = g.shape[0], g.shape[1], g.shape[-1]
        m = g.reshape(rl, -1)
        q, r = np.linalg.qr(m.T)
        cores[k] = q.T.reshape((q.shape[1],) + g.shape[1:])
        cores[k - 1] = np.tensordot(cores[k - 1], r.T, axes=(cores[k - 1].ndim - 1, 0))
    return cores


def _round_cores(cores: list[np.ndarray], tol: Tolerance) -> list[np.ndarray]:
    d = len(cores)
    if d == 1:
        return list(cores)
    cores = _orthogonalize_right(cores)
    norm = np.linalg.norm(cores[0])
    if norm == 0.0:
        return [np.zeros((1,) + g.shape[1:-1] + (1,)) for g in cores]
    eps = tol.rel_eps * norm / np.sqrt(d - 1)
    for k in range(d - 1):
        g = cores[k]
        shape = g.shape
        m = g.reshape(-1, shape[-1])
        u, s, vt = np.linalg.svd(m, full_matrices=False)
        r = _truncation_rank(s, eps, tol.max_rank)
        cores[k] = u[:, :r].reshape(shape[:-1] + (r,))
        cores[k + 1] = np.tensordot(s[:r, None] * vt[:r], cores[k + 1], axes=(1, 0))
    return cores


def tt_round(a: TensorTrain, tol: Tolerance = Tolerance()) -> TensorTrain:
    """Right-to-left QR then left-to-right truncated SVD."""
    return TensorTrain(_round_cores(list(a.cores), tol))


# ---------------------------------------------------------------------------
# operators


def mpo_identity(c: int) -> MatrixProductOperator:
    return MatrixProductOperator([np.eye(2).reshape(1, 2, 2, 1) for _ in range(c)])


def mpo_scale(m: MatrixProductOperator, s: float) -> MatrixProductOperator:
    cores = list(m.cores)
    cores[0] = cores[0] * s
    return MatrixProductOperator(cores)


def mpo_apply(m: MatrixProductOperator, v: TensorTrain,
              tol: Optional[Tolerance] = Tolerance()) -> TensorTrain:
    """Matrix-vector product corewise, then rounded; ``tol=None`` keeps the full ranks."""
    _check_same_length(m, v)
    cores = []
    for w, x in zip(m.cores, v.cores):
        z = np.einsum("aijb,cjd->acibd", w, x, optimize=True)
        cores.append(z.reshape(w.shape[0] * x.shape[0], 2, w.shape[3] * x.shape[2]))
    out = TensorTrain(cores)
    return tt_round(out, tol) if tol is not None else out


def mpo_add(a: MatrixProductOperator, b: MatrixProductOperator) -> MatrixProductOperator:
    _check_same_length(a, b)
    c = a.n_cores
    if c == 1:
        return MatrixProductOperator([a.cores[0] + b.cores[0]])
    cores = []
    for k, (x, y) in enumerate(zip(a.cores, b.cores)):
        if k == 0:
            cores.append(np.concatenate([x, y], axis=3))
        elif k == c - 1:
            cores.append(np.concatenate([x, y], axis=0))
        else:
            z = np.zeros((x.shape[0] + y.shape[0], 2, 2, x.shape[3] + y.shape[3]))
            z[: x.shape[0], :, :, : x.shape[3]] = x
            z[x.shape[0]:, :, :, x.shape[3]:] = y
            cores.append(z)
    return MatrixProductOperator(cores)


def mpo_compose(a: MatrixProductOperator, b: MatrixProductOperator) -> MatrixProductOperator:
    """Matrix product ``a @ b``."""
    _check_same_length(a, b)
    cores = []
    for x, y in zip(a.cores, b.cores):
        z = np.einsum("aijb,cjkd->acikbd", x, y, optimize=True)
        cores.append(z.reshape(x.shape[0] * y.shape[0], 2, 2, x.shape[3] * y.shape[3]))
    return MatrixProductOperator(cores)


def mpo_kron(*ops: MatrixProductOperator) -> MatrixProductOperator:
    cores = []
    for m in ops:
        cores.extend(m.cores)
    return MatrixProductOperator(cores)


def mpo_round(m: MatrixProductOperator, tol: Tolerance = Tolerance(1e-13)) -> MatrixProductOperator:
    return MatrixProductOperator(_round_cores(list(m.cores), tol))


def mpo_transpose(m: MatrixProductOperator) -> MatrixProductOperator:
    return MatrixProductOperator([g.transpose(0, 2, 1, 3) for g in m.cores])


def mpo_sum(terms: Iterable[MatrixProductOperator],
            tol: Optional[Tolerance] = Tolerance(1e-13)) -> MatrixProductOperator:
    terms = list(terms)
    out = terms[0]
    for t in terms[1:]:
        out = mpo_add(out, t)
    return mpo_round(out, tol) if tol is not None else out


# ---------------------------------------------------------------------------
# block-symbolic cores


def inner_core_product(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Inner core product of two block matrices whose entries are square blocks.

    ``t`` has shape ``(p, q, m, m)`` and ``g`` shape ``(q, s, n, n)``; the result
    has shape ``(p, s, m*n, m*n)`` with entry ``(i, k) = sum_j kron(t[i, j], g[j, k])``.
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(g, dtype=float)
    if t.ndim != 4 or g.ndim != 4:
        raise ValueError("block cores must be 4-dimensional (rows, cols, out, in)")
    if t.shape[1] != g.shape[0]:
        raise ValueError(f"block shapes do not conform: {t.shape[:2]} vs {g.shape[:2]}")
    p, _, m, m2 = t.shape
    _, s, n, n2 = g.shape
    out = np.einsum("ijab,jkcd->ikacbd", t, g)
    return out.reshape(p, s, m * n, m2 * n2)


def block_chain(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Fold ``inner_core_product`` over a list of block cores."""
    out = blocks[0]
    for b in blocks[1:]:
        out = inner_core_product(out, b)
    return out


def mpo_from_blocks(blocks: Sequence[np.ndarray]) -> MatrixProductOperator:
    """Read block cores ``(rows, cols, 2, 2)`` as MPO cores ``(rows, out, in, cols)``."""
    return MatrixProductOperator([np.asarray(b, dtype=float).transpose(0, 2, 3, 1) for b in blocks])
