from __future__ import annotations

import time
from typing import Callable, Optional

import numpy as np

from ..als import SolverConfig, solve
from ..build import (
    boundary_vector_tt,
    diag_mpo_from_tt,
    eraser_mpo,
    identity_mpo,
    tridiag_mpo,
    unit_vector_tt,
)
from ..tt import (
    MatrixProductOperator,
    TensorTrain,
    Tolerance,
    kron_concat,
    mpo_add,
    mpo_apply,
    mpo_compose,
    mpo_kron,
    mpo_round,
    mpo_sum,
    tt_add,
    tt_entry,
    tt_ones,
    tt_round,
    tt_scale,
    tt_sum,
)
from .encoding import encode_1d
from .grids import Grid1D, SpaceTimeConfig, TimeSteppingConfig
from .heat import Trajectory
from .operators import OP_TOL

D_TOL = Tolerance(1e-12)


def _zero_or(g, t):
    return 0.0 if g is None else float(g(t))


def burgers_ts_operators(grid: Grid1D, ts: TimeSteppingConfig, bc: str = "dirichlet"):
    """``A = tridiag(1-2r, r, r)`` and ``B = (l/2h) tridiag(0, 1, -1)``; with
    ``bc="neumann-dirichlet"`` the boundary rows are replaced via eraser corrections."""
    c, h, l = grid.c, grid.h, ts.l
    r = ts.r(h)
    A = tridiag_mpo((1 - 2 * r, r, r), c)
    B = tridiag_mpo((0.0, l / (2 * h), -l / (2 * h)), c)
    if bc == "neumann-dirichlet":
        A = mpo_round(mpo_add(A, eraser_mpo(1 - 2 * r - 1 / h, r + 1 / h, r, 1 - 2 * r - 1, c) * -1.0), OP_TOL)
        B = mpo_round(mpo_add(B, eraser_mpo(0.0, l / (2 * h), -l / (2 * h), 0.0, c) * -1.0), OP_TOL)
    elif bc != "dirichlet":
        raise ValueError(f"unknown boundary kind {bc!r}")
    return A, B


def burgers_ts(initial, g1: Optional[Callable], g2: Optional[Callable], nu: float, grid: Grid1D,
               ts: TimeSteppingConfig, cfg: SolverConfig = SolverConfig(), bc: str = "dirichlet",
               encoder: str = "interp", nodes: int = 24) -> Trajectory:
    """Linearized implicit time stepping for ``u_t = nu u_xx - u u_x``.

    Step ``j`` solves ``(A + D' B) w_{j+1} = w_j + b_{j+1}`` with the extrapolated
    advection speed ``D' = 2 D_j - D_{j-1}`` (``D' = D_0`` on the first step).

    ``bc="dirichlet"``: ``u(a,t) = g1(t)``, ``u(b,t) = g2(t)`` on an interior grid.
    ``bc="neumann-dirichlet"``: ``u_x(a,t) = g1(t)``, ``u(b,t) = g2(t)``; the grid
    should include both endpoints (style ``closed``).
    """
    t_start = time.perf_counter()
    ts = TimeSteppingConfig(ts.l, ts.timesteps, nu)
    c, h, l = grid.c, grid.h, ts.l
    r = ts.r(h)
    A, B = burgers_ts_operators(grid, ts, bc)
    P = eraser_mpo(1.0, 0.0, 0.0, 1.0, c) if bc == "neumann-dirichlet" else None
    w = encode_1d(initial, grid, encoder, nodes)
    w_prev = None
    states, diags, times = [], [], []
    rt = Tolerance(min(cfg.trunc.rel_eps, 1e-12), cfg.trunc.max_rank)
    for j in range(1, ts.timesteps + 1):
        t = j * l
        dvec = w if w_prev is None else tt_round(tt_add(tt_scale(w, 2.0), tt_scale(w_prev, -1.0)), D_TOL)
        D = diag_mpo_from_tt(dvec)
        lhs = mpo_round(mpo_add(A, mpo_compose(D, B)), OP_TOL)
        if bc == "dirichlet":
            v1, v2 = _zero_or(g1, t), _zero_or(g2, t)
            d1 = tt_entry(dvec, 0)
            dN = tt_entry(dvec, 2 ** c - 1)
            b = boundary_vector_tt(-r * v1 + d1 * l * v1 / (2 * h), -r * v2 - dN * l * v2 / (2 * h), c)
            rhs = tt_add(w, b)
        else:
            b = boundary_vector_tt(-_zero_or(g1, t), _zero_or(g2, t), c)
            rhs = tt_sum([w, tt_scale(mpo_apply(P, w), -1.0), b])
        rhs = tt_round(rhs, rt)
        w_new, d = solve(lhs, rhs, rhs, cfg)
        w_prev, w = w, w_new
        states.append(w)
        diags.append(d)
        times.append(t)
    return Trajectory(states, np.array(times), diags, {"total": time.perf_counter() - t_start})


def burgers_st_operators(gt: Grid1D, gx: Grid1D, nu: float, advection: str = "unit"):
    """``A1 + nu A2`` and the advection factor ``A3`` (to be left-multiplied by D).

    ``A1 = (1/h_t) L x I`` with L lower bidiagonal (-1 diagonal, 1 subdiagonal),
    ``A2 = I x tridiag(-2, 1, 1)/h_x**2``, ``A3 = s I x tridiag(0, -1, 1)`` where
    ``s = 1/h_x`` (``unit``) or ``1/(2 h_x)`` (``centered``).
    """
    ct, cx = gt.c, gx.c
    s = 1.0 / gx.h if advection == "unit" else 0.5 / gx.h
    L = tridiag_mpo((-1.0 / gt.h, 0.0, 1.0 / gt.h), ct)
    Lap = tridiag_mpo((-2 * nu / gx.h ** 2, nu / gx.h ** 2, nu / gx.h ** 2), cx)
    base = mpo_sum([mpo_kron(L, identity_mpo(cx)), mpo_kron(identity_mpo(ct), Lap)], OP_TOL)
    A3 = mpo_kron(identity_mpo(ct), tridiag_mpo((0.0, -s, s), cx))
    return base, A3, s


def burgers_st_rhs(g0, g1, g2, gt: Grid1D, gx: Grid1D, nu: float, encoder="interp", nodes=24):
    """Data part of the right-hand side and the boundary trace used by the advection term.

    Returns ``(b, trace)`` with ``b = -(|0> x g0/h_t + nu g1/h_x**2 x |0> + nu g2/h_x**2 x |1>)``
    and ``trace = g1 x |0> - g2 x |1>`` (or ``None`` for homogeneous data).
    """
    terms = [kron_concat(tt_scale(unit_vector_tt(gt.c, "first"), 1.0 / gt.h), encode_1d(g0, gx, encoder, nodes))]
    trace = []
    s2 = nu / gx.h ** 2
    if g1 is not None:
        e = encode_1d(g1, gt, encoder, nodes)
        terms.append(kron_concat(tt_scale(e, s2), unit_vector_tt(gx.c, "first")))
        trace.append(kron_concat(e, unit_vector_tt(gx.c, "first")))
    if g2 is not None:
        e = encode_1d(g2, gt, encoder, nodes)
        terms.append(kron_concat(tt_scale(e, s2), unit_vector_tt(gx.c, "last")))
        trace.append(kron_concat(tt_scale(e, -1.0), unit_vector_tt(gx.c, "last")))
    b = tt_scale(tt_sum(terms, Tolerance(1e-14)), -1.0)
    return b, (tt_sum(trace, Tolerance(1e-14)) if trace else None)


def burgers_st(initial, g1, g2, nu: float, grid: Grid1D, st: SpaceTimeConfig = SpaceTimeConfig(),
               cfg: SolverConfig = SolverConfig(), d_tol: Tolerance = D_TOL,
               encoder: str = "interp", nodes: int = 24, return_info: bool = False):
    """Space-time Burgers solve on a ``2**c x 2**c`` (t, x) grid, time cores first.

    Runs ``st.runs`` relinearizations: ``(A1 + nu A2 + D_k A3) w = b_k`` where D_k is
    the diagonal of the current speed estimate and ``b_k`` adds the advected
    boundary values.  Each solve is warm-started from the previous iterate.
    Returns the list of iterates (one per run); the last one is the answer.
    """
    gt = Grid1D(0.0, st.T, grid.c, "spacetime")
    base, A3, s = burgers_st_operators(gt, grid, nu, st.advection)
    b, trace = burgers_st_rhs(initial, g1, g2, gt, grid, nu, encoder, nodes)
    if st.linearization == "rhs":
        u = b
    else:
        u = kron_concat(tt_ones(gt.c), encode_1d(initial, grid, encoder, nodes))
    x = b
    iterates, diags = [], []
    for _ in range(st.runs):
        u = tt_round(u, d_tol)
        D = diag_mpo_from_tt(u)
        lhs = mpo_round(mpo_add(base, mpo_compose(D, A3)), OP_TOL)
        rhs = b
        if trace is not None:
            rhs = tt_round(tt_add(b, tt_scale(mpo_apply(D, trace), -s)), Tolerance(1e-13))
        x, d = solve(lhs, x, rhs, cfg)
        iterates.append(x)
        diags.append(d)
        u = x
    return (iterates, diags) if return_info else iterates
