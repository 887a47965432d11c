from __future__ import annotations

from typing import Optional

import numpy as np

from ..als import GuessStrategy, SolverConfig, make_guess, solve
from ..build import unit_vector_tt
from ..tt import TensorTrain, Tolerance, kron_concat, tt_from_dense, tt_round, tt_scale, tt_sum
from .encoding import encode_1d, encode_2d
from .grids import BoundarySpec2D, Grid1D
from .operators import laplacian_nd

DEFAULT_GUESS = GuessStrategy("random-ramp", step=2, max_rank=12)


def poisson_operator(grid: Grid1D, dims: int = 2, anisotropy=None):
    weights = [1.0] + (list(anisotropy) if anisotropy is not None else [1.0] * (dims - 1))
    if len(weights) != dims:
        raise ValueError("anisotropy needs dims - 1 weights")
    return laplacian_nd(grid.c, weights)


def boundary_rhs_2d(bc: BoundarySpec2D, grid: Grid1D, encoder="interp", nodes=24) -> Optional[TensorTrain]:
    """``|0> x left + |1> x right + bottom x |0> + top x |1>`` (x block first)."""
    if any(k != "dirichlet" for k in bc.kinds):
        raise ValueError("the Poisson solver supports Dirichlet edges only")
    bc.check_corners(grid.a, grid.b, grid.a, grid.b)
    c = grid.c
    e0, e1 = unit_vector_tt(c, "first"), unit_vector_tt(c, "last")
    terms = []
    if bc.left is not None:
        terms.append(kron_concat(e0, encode_1d(bc.left, grid, encoder, nodes)))
    if bc.right is not None:
        terms.append(kron_concat(e1, encode_1d(bc.right, grid, encoder, nodes)))
    if bc.bottom is not None:
        terms.append(kron_concat(encode_1d(bc.bottom, grid, encoder, nodes), e0))
    if bc.top is not None:
        terms.append(kron_concat(encode_1d(bc.top, grid, encoder, nodes), e1))
    if not terms:
        return None
    return tt_sum(terms, Tolerance(1e-14))


def _encode_source(source, grid, dims, encoder, nodes):
    if isinstance(source, TensorTrain):
        if source.n_cores != dims * grid.c:
            raise ValueError("source train does not match the grid")
        return source
    if source is None:
        return None
    if dims == 2:
        return encode_2d(source, grid, grid, encoder, nodes)
    x = grid.points()
    X = np.meshgrid(*([x] * dims), indexing="ij")
    return tt_from_dense(np.asarray(source(*X), dtype=float).reshape(-1), Tolerance(1e-12))


def poisson_solve(source, bc: Optional[BoundarySpec2D], grid: Grid1D, cfg: SolverConfig = SolverConfig(),
                  dims: int = 2, anisotropy=None, guess: Optional[TensorTrain] = None,
                  guess_strategy: GuessStrategy = DEFAULT_GUESS, encoder: str = "interp",
                  nodes: int = 16, return_info: bool = False):
    """Solve ``sum_d eps_d u_{x_d x_d} = f`` with Dirichlet data on the interior grid.

    The discrete system is ``A w = h**2 f - b`` with ``b`` collecting the known
    boundary values.  Returns the solution train (serial ordering), plus the
    solver diagnostics when ``return_info`` is set.
    """
    if dims not in (2, 3):
        raise ValueError("dims must be 2 or 3")
    A = poisson_operator(grid, dims, anisotropy)
    f = _encode_source(source, grid, dims, encoder, nodes)
    b = None
    if bc is not None:
        if dims != 2:
            if any(e is not None for e in (bc.left, bc.right, bc.bottom, bc.top)):
                raise ValueError("3D solves support homogeneous boundaries only")
        else:
            b = boundary_rhs_2d(bc, grid)
    parts = []
    if f is not None:
        parts.append(tt_scale(f, grid.h ** 2))
    if b is not None:
        parts.append(tt_scale(b, -1.0))
    if not parts:
        from ..tt import tt_zeros
        zero = tt_zeros(dims * grid.c)
        return (zero, None) if return_info else zero
    rhs = tt_round(tt_sum(parts), Tolerance(1e-14))
    x0 = guess if guess is not None else make_guess(guess_strategy, rhs, cfg.seed)
    x, diag = solve(A, x0, rhs, cfg)
    return (x, diag) if return_info else x
