from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..als import GuessStrategy, SolverConfig, make_guess, solve
from ..build import boundary_vector_tt, identity_mpo, tridiag_mpo, unit_vector_tt
from ..encode import InterpolationConfig, interpolative_tt
from ..tt import TensorTrain, Tolerance, kron_concat, mpo_kron, mpo_sum, tt_add, tt_round, tt_scale, tt_sum
from .encoding import encode_1d
from .grids import Grid1D, TimeSteppingConfig
from .operators import OP_TOL


@dataclass
class Trajectory:
    """States after each time step (``states[j]`` is the solution at ``times[j]``)."""
    states: list
    times: np.ndarray
    diagnostics: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, j):
        return self.states[j]


def _rhs_round(cfg: SolverConfig) -> Tolerance:
    return Tolerance(min(cfg.trunc.rel_eps, 1e-12), cfg.trunc.max_rank)


def heat_ts_1d(initial, g1: Callable, g2: Callable, grid: Grid1D, ts: TimeSteppingConfig,
               cfg: SolverConfig = SolverConfig(), encoder: str = "interp", nodes: int = 24) -> Trajectory:
    """Implicit Euler for ``u_t = nu u_xx`` with Dirichlet data ``g1(t)``, ``g2(t)``.

    Each step solves ``A w_{j+1} = w_j + b_{j+1}``, ``A = tridiag(1-2r, r, r)``,
    ``r = -nu l / h**2``, starting the solver from the right-hand side.
    """
    t_start = time.perf_counter()
    c, h = grid.c, grid.h
    r = ts.r(h)
    A = tridiag_mpo((1 - 2 * r, r, r), c)
    w = encode_1d(initial, grid, encoder, nodes)
    states, diags, times = [], [], []
    rt = _rhs_round(cfg)
    for j in range(1, ts.timesteps + 1):
        t = j * ts.l
        b = boundary_vector_tt(-r * float(g1(t)), -r * float(g2(t)), c)
        rhs = tt_round(tt_add(w, b), rt)
        w, d = solve(A, rhs, rhs, cfg)
        states.append(w)
        diags.append(d)
        times.append(t)
    return Trajectory(states, np.array(times), diags, {"total": time.perf_counter() - t_start})


def heat_st_operator(gt: Grid1D, gx: Grid1D, nu: float = 1.0):
    """``(L/h_t) x I + I x nu T/h_x**2`` with L lower bidiagonal (-1 diag, 1 sub)."""
    ct, cx = gt.c, gx.c
    L = tridiag_mpo((-1.0 / gt.h, 0.0, 1.0 / gt.h), ct)
    T = tridiag_mpo((-2.0 * nu / gx.h ** 2, nu / gx.h ** 2, nu / gx.h ** 2), cx)
    return mpo_sum([mpo_kron(L, identity_mpo(cx)), mpo_kron(identity_mpo(ct), T)], OP_TOL)


def heat_st_rhs(g0, g1, g2, gt: Grid1D, gx: Grid1D, nu: float = 1.0, encoder="interp", nodes=24):
    """``-( |0> x g0 / h_t + nu g1(t)/h_x**2 x |0> + nu g2(t)/h_x**2 x |1> )``."""
    terms = [kron_concat(tt_scale(unit_vector_tt(gt.c, "first"), 1.0 / gt.h), encode_1d(g0, gx, encoder, nodes))]
    s = nu / gx.h ** 2
    if g1 is not None:
        terms.append(kron_concat(tt_scale(encode_1d(g1, gt, encoder, nodes), s), unit_vector_tt(gx.c, "first")))
    if g2 is not None:
        terms.append(kron_concat(tt_scale(encode_1d(g2, gt, encoder, nodes), s), unit_vector_tt(gx.c, "last")))
    return tt_scale(tt_sum(terms, Tolerance(1e-14)), -1.0)


def heat_st_1d(initial, g1, g2, grid: Grid1D, cfg: SolverConfig = SolverConfig(), T: float = 1.0,
               nu: float = 1.0, guess: Optional[TensorTrain] = None,
               guess_strategy: GuessStrategy = GuessStrategy(max_rank=12), encoder: str = "interp",
               nodes: int = 24, return_info: bool = False):
    """All-at-once solve on a ``2**c x 2**c`` (t, x) grid; time cores come first.

    The time axis is ``t_i = i T / N`` (``i = 1..N``); ``grid`` is the spatial grid.
    """
    gt = Grid1D(0.0, T, grid.c, "spacetime")
    A = heat_st_operator(gt, grid, nu)
    b = heat_st_rhs(initial, g1, g2, gt, grid, nu, encoder, nodes)
    x0 = guess if guess is not None else make_guess(guess_strategy, b, cfg.seed)
    x, d = solve(A, x0, b, cfg)
    return (x, d) if return_info else x


def gaussian_pair(scale: float = 1.0):
    """Two Gaussians travelling in opposite directions, as a function of (s, t)."""
    k = scale / np.sqrt(2 * np.pi)

    def g(s, t):
        s = np.asarray(s, dtype=float)
        return k * (np.exp(-10 * (s + 2 - t) ** 2) + np.exp(-10 * (s - 3.4 + t) ** 2))
    return g


def heat2d_tdbc(grid: Grid1D, ts: TimeSteppingConfig, alpha: float = 0.6,
                left: Optional[Callable] = None, top: Optional[Callable] = None,
                cfg: SolverConfig = SolverConfig(method="als", sweeps=1), nodes: int = 12,
                initial: Optional[TensorTrain] = None) -> Trajectory:
    """2D heat equation with time-dependent Dirichlet data on the left and top edges.

    ``left(y, t)`` and ``top(x, t)`` are re-encoded every step with the 1D
    interpolative construction; the other edges and (by default) the initial
    state are zero.  Step system: ``(I + r (T x I + I x T)) w^{k+1} = w^k + b^{k+1}``
    with ``r = -alpha l / h**2``.
    """
    t_start = time.perf_counter()
    c, h = grid.c, grid.h
    r = -alpha * ts.l / h ** 2
    I = identity_mpo(c)
    T = tridiag_mpo((-2.0, 1.0, 1.0), c)
    A = mpo_sum([mpo_kron(I, I), mpo_kron(T, I) * r, mpo_kron(I, T) * r], OP_TOL)
    e0, e1 = unit_vector_tt(c, "first"), unit_vector_tt(c, "last")
    icfg = InterpolationConfig(nodes, c=c)
    w = initial if initial is not None else TensorTrain([np.zeros((1, 2, 1))] * (2 * c))
    states, diags, times = [], [], []
    bc_time = 0.0
    rt = _rhs_round(cfg)
    for k in range(ts.timesteps):
        t = (k + 1) * ts.l
        t0 = time.perf_counter()
        terms = []
        if left is not None:
            terms.append(kron_concat(e0, interpolative_tt(lambda y: left(y, t), icfg, grid.x0, h)))
        if top is not None:
            terms.append(kron_concat(interpolative_tt(lambda x: top(x, t), icfg, grid.x0, h), e1))
        bvec = tt_scale(tt_sum(terms, Tolerance(1e-13)), -r) if terms else None
        bc_time += time.perf_counter() - t0
        rhs = tt_round(tt_add(w, bvec), rt) if bvec is not None else w
        w, d = solve(A, rhs, rhs, cfg)
        states.append(w)
        diags.append(d)
        times.append(t)
    total = time.perf_counter() - t_start
    return Trajectory(states, np.array(times), diags, {"bc_build": bc_time, "total": total})

