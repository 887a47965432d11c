"""ALS / MALS solvers for ``A x = b`` with A an MPO and x, b tensor trains.

Local problems are Galerkin projections onto orthonormal interfaces.  One sweep
is a left-to-right pass followed by a right-to-left pass.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .tt import (
    MatrixProductOperator,
    TensorTrain,
    Tolerance,
    _check_same_length,
    _truncation_rank,
    mpo_apply,
    tt_add,
    tt_inner,
    tt_norm,
    tt_scale,
)


@dataclass(frozen=True)
class SolverConfig:
    method: str = "mals"
    sweeps: int = 2
    trunc: Tolerance = Tolerance(1e-12)
    direct_max: int = 4096           # local dimension solved by dense LU
    local_tol: float = 1e-10
    local_maxiter: int = 200
    seed: int = 0
    track_residual: bool = True

    def __post_init__(self):
        if self.method not in ("als", "mals"):
            raise ValueError("method must be 'als' or 'mals'")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")


@dataclass(frozen=True)
class GuessStrategy:
    kind: str = "random-ramp"        # rhs-ranks | random-ramp
    rank_pad: int = 0
    progression: str = "arithmetic"  # arithmetic | geometric
    step: int = 2
    max_rank: int = 16

    def __post_init__(self):
        if self.kind not in ("rhs-ranks", "random-ramp"):
            raise ValueError(f"unknown guess kind {self.kind!r}")
        if self.progression not in ("arithmetic", "geometric"):
            raise ValueError(f"unknown progression {self.progression!r}")
        if self.rank_pad < 0 or self.step < 1 or self.max_rank < 1:
            raise ValueError("guess parameters must be positive")


@dataclass
class Diagnostics:
    method: str
    residuals: list = field(default_factory=list)
    wall_time: float = 0.0
    max_rank: int = 0
    regularized: int = 0
    iterative_solves: int = 0
    local_solves: int = 0

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else float("nan")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def ramp_ranks(c: int, strategy: GuessStrategy) -> list[int]:
    out = []
    for k in range(1, c):
        m = min(k, c - k)
        r = strategy.step * m if strategy.progression == "arithmetic" else strategy.step ** m
        out.append(int(min(r, strategy.max_rank, 2 ** m)))
    return out


def make_guess(strategy: GuessStrategy, template: TensorTrain, seed: int = 0) -> TensorTrain:
    """Random unit-norm initial guess.

    ``rhs-ranks`` copies the template's ranks plus ``rank_pad``; ``random-ramp``
    grows ranks to the middle of the chain and mirrors them.  Ranks never exceed
    the full-rank bound ``2**min(k, c-k)``.
    """
    c = template.n_cores
    if strategy.kind == "rhs-ranks":
        inner = [min(r + strategy.rank_pad, 2 ** min(k, c - k))
                 for k, r in enumerate(template.ranks[1:-1], start=1)]
    else:
        inner = ramp_ranks(c, strategy)
    ranks = [1] + inner + [1]
    rng = np.random.default_rng(seed)
    cores = [rng.standard_normal((ranks[k], 2, ranks[k + 1])) for k in range(c)]
    t = TensorTrain(cores)
    return tt_scale(t, 1.0 / tt_norm(t))


def residual(A: MatrixProductOperator, x: TensorTrain, b: TensorTrain) -> float:
    """``||A x - b|| / ||b||`` evaluated in TT arithmetic."""
    _check_same_length(A, x)
    _check_same_length(x, b)
    nb = tt_norm(b)
    ax = mpo_apply(A, x, None)
    if ax.max_rank + b.max_rank <= 400:
        r = tt_norm(tt_add(ax, tt_scale(b, -1.0)))
    else:
        # Gram expansion; loses digits below ~1e-8 relative but avoids a large QR
        r2 = _mpo_gram(A, x) - 2.0 * tt_inner(ax, b) + nb ** 2
        r = np.sqrt(max(r2, 0.0))
    return float(r / nb) if nb > 0 else float(r)


def _mpo_gram(A, x) -> float:
    env = np.ones((1, 1, 1, 1))
    for w, g in zip(A.cores, x.cores):
        t = np.tensordot(env, g, axes=(0, 0))                # b c d i x
        t = np.tensordot(t, w, axes=([0, 3], [0, 2]))        # c d x j y
        t = np.tensordot(t, w, axes=([0, 3], [0, 1]))        # d x y k z
        env = np.tensordot(t, g, axes=([0, 3], [0, 1]))      # x y z w
    return float(env.ravel()[0])


# ---------------------------------------------------------------------------
# environments


def _left_A(env, g, w):
    # env (a, A, b), g (a, i, a'), w (A, i, j, A'), g (b, j, b')
    t = np.tensordot(env, g, axes=(0, 0))              # A b i a'
    t = np.tensordot(t, w, axes=([0, 2], [0, 1]))      # b a' j A'
    t = np.tensordot(t, g, axes=([0, 2], [0, 1]))      # a' A' b'
    return t


def _right_A(env, g, w):
    # env (a', A', b'), g (a, i, a'), w (A, i, j, A'), g (b, j, b')
    t = np.tensordot(g, env, axes=(2, 0))              # a i A' b'
    t = np.tensordot(t, w, axes=([1, 2], [1, 3]))      # a b' A j
    t = np.tensordot(t, g, axes=([1, 3], [2, 1]))      # a A b
    return t


def _left_b(env, g, v):
    # env (a, p), g (a, i, a'), v (p, i, p')
    t = np.tensordot(env, g, axes=(0, 0))              # p i a'
    return np.tensordot(t, v, axes=([0, 1], [0, 1]))   # a' p'


def _right_b(env, g, v):
    t = np.tensordot(g, env, axes=(2, 0))              # a i p'
    return np.tensordot(t, v, axes=([1, 2], [1, 2]))   # a p


class _Workspace:
    """Mutable sweep state for a single solve."""

    def __init__(self, A, x0, b, cfg):
        _check_same_length(A, x0)
        _check_same_length(x0, b)
        for w in A.cores:
            if w.shape[1] != w.shape[2]:
                raise ValueError("operator must be square")
        self.A = list(A.cores)
        self.b = list(b.cores)
        self.x = [np.array(g) for g in x0.cores]
        self.cfg = cfg
        self.d = len(self.x)
        self.diag = Diagnostics(cfg.method)
        d = self.d
        self.LA = [None] * (d + 1)
        self.Lb = [None] * (d + 1)
        self.RA = [None] * (d + 1)
        self.Rb = [None] * (d + 1)
        one3 = np.ones((1, 1, 1))
        self.LA[0] = one3
        self.RA[d] = one3
        self.Lb[0] = np.ones((1, 1))
        self.Rb[d] = np.ones((1, 1))
        self.symmetric = all(np.allclose(w, w.transpose(0, 2, 1, 3), rtol=0, atol=0) for w in self.A)
        # right-orthogonalize everything but core 0, building right environments
        for k in range(d - 1, 0, -1):
            self._right_orth(k)

    def _right_orth(self, k):
        g = self.x[k]
        rl = g.shape[0]
        q, r = np.linalg.qr(g.reshape(rl, -1).T)
        self.x[k] = q.T.reshape(q.shape[1], 2, g.shape[2])
        self.x[k - 1] = np.tensordot(self.x[k - 1], r.T, axes=(2, 0))
        self._update_right(k)

    def _left_orth(self, k):
        g = self.x[k]
        q, r = np.linalg.qr(g.reshape(-1, g.shape[2]))
        self.x[k] = q.reshape(g.shape[0], 2, q.shape[1])
        self.x[k + 1] = np.tensordot(r, self.x[k + 1], axes=(1, 0))
        self._update_left(k)

    def _update_left(self, k):
        self.LA[k + 1] = _left_A(self.LA[k], self.x[k], self.A[k])
        self.Lb[k + 1] = _left_b(self.Lb[k], self.x[k], self.b[k])

    def _update_right(self, k):
        self.RA[k] = _right_A(self.RA[k + 1], self.x[k], self.A[k])
        self.Rb[k] = _right_b(self.Rb[k + 1], self.x[k], self.b[k])

    # -- local problems ----------------------------------------------------

    def _local(self, k, two):
        """Operator block W (A, n, n, C), environments and local rhs for site(s) k[, k+1]."""
        if two:
            w1, w2 = self.A[k], self.A[k + 1]
            W = np.einsum("aijb,bklc->aikjlc", w1, w2)
            W = W.reshape(w1.shape[0], 4, 4, w2.shape[3])
            v = np.tensordot(self.b[k], self.b[k + 1], axes=(2, 0))
            v = v.reshape(v.shape[0], 4, v.shape[3])
            kr = k + 2
        else:
            W = self.A[k]
            v = self.b[k]
            kr = k + 1
        L, R = self.LA[k], self.RA[kr]
        g = np.tensordot(self.Lb[k], v, axes=(1, 0))
        g = np.tensordot(g, self.Rb[kr], axes=(2, 1))
        return L, W, R, g

    def _solve_local(self, L, W, R, g, u0):
        cfg = self.cfg
        shape = g.shape
        n = g.size
        self.diag.local_solves += 1
        rhs = g.reshape(-1)
        if n <= cfg.direct_max:
            t = np.tensordot(L, W, axes=(1, 0))                 # a x i j C
            H = np.tensordot(t, R, axes=(4, 1))                 # a x i j c y
            H = H.transpose(0, 2, 4, 1, 3, 5).reshape(n, n)
            try:
                with np.errstate(all="raise"):
                    lu = sla.lu_factor(H, check_finite=True)
                    if np.min(np.abs(np.diag(lu[0]))) <= 1e-15 * np.abs(H).max():
                        raise np.linalg.LinAlgError("singular")
                    u = sla.lu_solve(lu, rhs)
            except (np.linalg.LinAlgError, FloatingPointError, ValueError):
                self.diag.regularized += 1
                shift = 1e-14 * np.linalg.norm(H)
                u = np.linalg.lstsq(H + shift * np.eye(n), rhs, rcond=None)[0]
            return u.reshape(shape)

        self.diag.iterative_solves += 1

        def mv(vec):
            u = vec.reshape(shape)
            t = np.tensordot(L, u, axes=(2, 0))                 # a A j c'
            t = np.tensordot(t, W, axes=([1, 2], [0, 2]))       # a c' i C
            t = np.tensordot(t, R, axes=([1, 3], [2, 1]))       # a i c
            return t.reshape(-1)

        op = spla.LinearOperator((n, n), matvec=mv, dtype=float)
        x0 = u0.reshape(-1)
        if self.symmetric:
            u, info = spla.cg(op, rhs, x0=x0, rtol=cfg.local_tol, maxiter=cfg.local_maxiter)
            if info != 0:
                u, info = spla.gmres(op, rhs, x0=u, rtol=cfg.local_tol, restart=50,
                                     maxiter=cfg.local_maxiter)
        else:
            u, info = spla.gmres(op, rhs, x0=x0, rtol=cfg.local_tol, restart=50,
                                 maxiter=cfg.local_maxiter)
        return u.reshape(shape)

    # -- sweeps -------------------------------------------------------------

    def als_sweep(self):
        d = self.d
        for k in range(d):
            L, W, R, g = self._local(k, False)
            self.x[k] = self._solve_local(L, W, R, g, self.x[k])
            if k < d - 1:
                self._left_orth(k)
        for k in range(d - 1, -1, -1):
            if k < d - 1:
                L, W, R, g = self._local(k, False)
                self.x[k] = self._solve_local(L, W, R, g, self.x[k])
            if k > 0:
                self._right_orth(k)

    def _split(self, u, k, left_to_right):
        cfg = self.cfg
        rl, rr = u.shape[0], u.shape[3]
        m = u.reshape(rl * 2, 2 * rr)
        U, s, Vt = np.linalg.svd(m, full_matrices=False)
        nrm = np.linalg.norm(s)
        r = _truncation_rank(s, cfg.trunc.rel_eps * nrm, cfg.trunc.max_rank)
        U, s, Vt = U[:, :r], s[:r], Vt[:r]
        if left_to_right:
            self.x[k] = U.reshape(rl, 2, r)
            self.x[k + 1] = (s[:, None] * Vt).reshape(r, 2, rr)
            self._update_left(k)
        else:
            self.x[k] = (U * s).reshape(rl, 2, r)
            self.x[k + 1] = Vt.reshape(r, 2, rr)
            self._update_right(k + 1)

    def mals_sweep(self):
        d = self.d
        for k in range(d - 1):
            L, W, R, g = self._local(k, True)
            u0 = np.tensordot(self.x[k], self.x[k + 1], axes=(2, 0))
            u = self._solve_local(L, W, R, g, u0.reshape(g.shape))
            self._split(u.reshape(g.shape[0], 2, 2, g.shape[2]), k, True)
        for k in range(d - 2, -1, -1):
            L, W, R, g = self._local(k, True)
            u0 = np.tensordot(self.x[k], self.x[k + 1], axes=(2, 0))
            u = self._solve_local(L, W, R, g, u0.reshape(g.shape))
            self._split(u.reshape(g.shape[0], 2, 2, g.shape[2]), k, False)

    def result(self) -> TensorTrain:
        return TensorTrain(self.x)


def _run(A, x0, b, cfg, two_site):
    t0 = time.perf_counter()
    if x0.n_cores == 1 or (two_site and x0.n_cores < 2):
        two_site = False
    ws = _Workspace(A, x0, b, cfg)
    Aop = MatrixProductOperator(ws.A)
    for _ in range(cfg.sweeps):
        if two_site:
            ws.mals_sweep()
        else:
            ws.als_sweep()
        if cfg.track_residual:
            ws.diag.residuals.append(residual(Aop, ws.result(), b))
    x = ws.result()
    ws.diag.max_rank = x.max_rank
    ws.diag.wall_time = time.perf_counter() - t0
    return x, ws.diag


def als_solve(A: MatrixProductOperator, x0: TensorTrain, b: TensorTrain,
              cfg: SolverConfig = SolverConfig(method="als")):
    """One-site ALS; the ranks of ``x0`` are kept throughout."""
    return _run(A, x0, b, cfg, False)


def mals_solve(A: MatrixProductOperator, x0: TensorTrain, b: TensorTrain,
               cfg: SolverConfig = SolverConfig()):
    """Two-site MALS with SVD splitting under ``cfg.trunc``."""
    return _run(A, x0, b, cfg, True)


def solve(A, x0, b, cfg: SolverConfig):
    """Dispatch on ``cfg.method``."""
    if cfg.method == "als":
        return als_solve(A, x0, b, cfg)
    return mals_solve(A, x0, b, cfg)
