"""Closed-form QTT vectors and operators.

Grids follow the big-endian convention of :mod:`qttpde.tt`: index
``k = sum_j x_j 2**(c-j)`` with ``x_1`` the most significant bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np

from .tt import (
    MatrixProductOperator,
    TensorTrain,
    Tolerance,
    block_chain,
    mpo_from_blocks,
    mpo_identity,
    tt_add,
    tt_round,
    tt_scale,
)

_I = np.eye(2)
_J = np.array([[0.0, 1.0], [0.0, 0.0]])    # superdiagonal shift
_Jt = np.array([[0.0, 0.0], [1.0, 0.0]])   # subdiagonal shift
_O = np.zeros((2, 2))


@dataclass(frozen=True)
class TridiagCoefficients:
    alpha: float
    beta: float
    gamma: float


@dataclass(frozen=True)
class SineParams:
    """``sin(alpha * x + phi)`` sampled on ``x_k = k / 2**c``.

    With ``endpoint=True`` the grid is ``x_k = k / (2**c - 1)`` instead, which is
    what :func:`shifted_sine_params` relies on.  ``K`` records the target
    wavenumber when the parameters came from the shifted construction.
    """
    alpha: float
    phi: float
    c: int
    K: Optional[float] = None
    endpoint: bool = False

    def __post_init__(self):
        if self.c < 2:
            raise ValueError("sine_tt needs c >= 2")

    def grid(self) -> np.ndarray:
        n = 2 ** self.c
        return np.arange(n) / (n - 1 if self.endpoint else n)


def identity_mpo(c: int) -> MatrixProductOperator:
    return mpo_identity(c)


def tridiag_blocks(coeffs: TridiagCoefficients, c: int) -> list[np.ndarray]:
    """Block cores of the bond-3 tridiagonal Toeplitz operator."""
    a, b, g = coeffs.alpha, coeffs.beta, coeffs.gamma
    last = np.stack([a * _I + b * _J + g * _Jt, g * _J, b * _Jt])[:, None]
    if c == 1:
        return [(a * _I + b * _J + g * _Jt)[None, None]]
    first = np.stack([_I, _Jt, _J])[None]
    mid = np.array([[_I, _Jt, _J], [_O, _J, _O], [_O, _O, _Jt]])
    return [first] + [mid] * (c - 2) + [last]


def tridiag_mpo(coeffs, c: int) -> MatrixProductOperator:
    """Toeplitz tridiagonal: diagonal alpha, superdiagonal beta, subdiagonal gamma."""
    if c < 2:
        raise ValueError("tridiag_mpo needs c >= 2")
    if not isinstance(coeffs, TridiagCoefficients):
        coeffs = TridiagCoefficients(*coeffs)
    return mpo_from_blocks(tridiag_blocks(coeffs, c))


def tridiag_dense_blocks(coeffs: TridiagCoefficients, c: int) -> np.ndarray:
    """Assemble the operator through the symbolic block chain (mostly for checking)."""
    out = block_chain(tridiag_blocks(coeffs, c))
    return out[0, 0]


def unit_vector_tt(c: int, which: str = "first") -> TensorTrain:
    if which not in ("first", "last"):
        raise ValueError("which must be 'first' or 'last'")
    bit = 0 if which == "first" else 1
    cores = []
    for _ in range(c):
        g = np.zeros((1, 2, 1))
        g[0, bit, 0] = 1.0
        cores.append(g)
    return TensorTrain(cores)


def boundary_vector_tt(v_a: float, v_b: float, c: int) -> TensorTrain:
    """``(v_a, 0, ..., 0, v_b)`` as a rank <= 2 train."""
    v = tt_add(tt_scale(unit_vector_tt(c, "first"), v_a), tt_scale(unit_vector_tt(c, "last"), v_b))
    return tt_round(v, Tolerance(0.0))


def diag_mpo_from_tt(v: TensorTrain) -> MatrixProductOperator:
    cores = []
    for g in v.cores:
        d = np.zeros((g.shape[0], 2, 2, g.shape[2]))
        d[:, 0, 0, :] = g[:, 0, :]
        d[:, 1, 1, :] = g[:, 1, :]
        cores.append(d)
    return MatrixProductOperator(cores)


def eraser_mpo(n1: float, n2: float, n3: float, n4: float, c: int) -> MatrixProductOperator:
    """Zero except (0,0)=n1, (0,1)=n2, (N-1,N-2)=n3, (N-1,N-1)=n4."""
    if c < 2:
        raise ValueError("eraser_mpo needs c >= 2")
    first = np.zeros((1, 2, 2, 2))
    first[0, 0, 0, 0] = 1.0
    first[0, 1, 1, 1] = 1.0
    mid = np.zeros((2, 2, 2, 2))
    mid[0, 0, 0, 0] = 1.0
    mid[1, 1, 1, 1] = 1.0
    last = np.zeros((2, 2, 2, 1))
    last[0, 0, 0, 0] = n1
    last[0, 0, 1, 0] = n2
    last[1, 1, 0, 0] = n3
    last[1, 1, 1, 0] = n4
    return MatrixProductOperator([first] + [mid] * (c - 2) + [last])


# ---------------------------------------------------------------------------
# analytic function trains on affine grids x_k = x0 + k * delta


def _bit_weights(c: int, delta: float) -> np.ndarray:
    return delta * 2.0 ** np.arange(c - 1, -1, -1)


def sine_affine_tt(alpha: float, phi: float, c: int, x0: float = 0.0, delta: Optional[float] = None) -> TensorTrain:
    """Rank-2 train of ``sin(alpha * (x0 + k delta) + phi)``."""
    if delta is None:
        delta = 2.0 ** -c
    th = alpha * _bit_weights(c, delta)
    p0 = alpha * x0 + phi
    if c == 1:
        return TensorTrain([np.sin(p0 + np.array([0.0, th[0]])).reshape(1, 2, 1)])
    cores = []
    first = np.zeros((1, 2, 2))
    for b in (0, 1):
        first[0, b] = [np.sin(p0 + b * th[0]), np.cos(p0 + b * th[0])]
    cores.append(first)
    for k in range(1, c - 1):
        g = np.zeros((2, 2, 2))
        for b in (0, 1):
            t = b * th[k]
            g[:, b, :] = [[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]
        cores.append(g)
    last = np.zeros((2, 2, 1))
    for b in (0, 1):
        t = b * th[-1]
        last[:, b, 0] = [np.cos(t), np.sin(t)]
    cores.append(last)
    return TensorTrain(cores)


def sine_tt(params: SineParams) -> TensorTrain:
    n = 2 ** params.c
    delta = 1.0 / (n - 1) if params.endpoint else 1.0 / n
    return sine_affine_tt(params.alpha, params.phi, params.c, 0.0, delta)


def shifted_sine_params(K: float, c: int) -> SineParams:
    """Parameters reproducing ``sin(K y)`` on ``y_i = i / (2**c + 1)``, ``i = 1..2**c``."""
    n = 2 ** c
    return SineParams(alpha=K * (n - 1) / (n + 1), phi=K / (n + 1), c=c, K=K, endpoint=True)


def exp_affine_tt(alpha: float, c: int, x0: float = 0.0, delta: Optional[float] = None) -> TensorTrain:
    """Rank-1 train of ``exp(alpha * (x0 + k delta))``."""
    if delta is None:
        delta = 2.0 ** -c
    w = _bit_weights(c, delta)
    cores = [np.array([1.0, np.exp(alpha * wk)]).reshape(1, 2, 1) for wk in w]
    cores[0] = cores[0] * np.exp(alpha * x0)
    return TensorTrain(cores)


def exp_tt(alpha: float, c: int) -> TensorTrain:
    return exp_affine_tt(alpha, c)


def poly_affine_tt(coefficients: Sequence[float], c: int, x0: float = 0.0,
                   delta: Optional[float] = None) -> TensorTrain:
    """Train of ``sum_n a_n x**n`` with ranks <= degree + 1 (coefficients lowest first)."""
    a = np.asarray(coefficients, dtype=float)
    if a.size == 0:
        raise ValueError("empty coefficient list")
    if delta is None:
        delta = 2.0 ** -c
    d = a.size - 1
    w = _bit_weights(c, delta)
    binom = np.array([[comb(n, m) for n in range(d + 1)] for m in range(d + 1)], dtype=float)
    pw = np.arange(d + 1)

    def step(wk):
        # G[m, b, n] = C(n, m) (b w)^(n-m): moves the prefix power basis one bit on
        g = np.zeros((d + 1, 2, d + 1))
        for b in (0, 1):
            e = pw[None, :] - pw[:, None]
            shift = np.where(e >= 0, (b * wk) ** np.clip(e, 0, None), 0.0)
            g[:, b, :] = binom * shift
        return g

    start = x0 ** pw  # power basis of the offset (0**0 = 1)
    if c == 1:
        g = np.einsum("m,mbn,n->b", start, step(w[0]), a)
        return TensorTrain([g.reshape(1, 2, 1)])
    cores = [np.einsum("m,mbn->bn", start, step(w[0]))[None]]
    for k in range(1, c - 1):
        cores.append(step(w[k]))
    cores.append(np.einsum("mbn,n->mb", step(w[-1]), a)[:, :, None])
    return TensorTrain(cores)


def poly_tt(coefficients: Sequence[float], c: int) -> TensorTrain:
    return poly_affine_tt(coefficients, c)
