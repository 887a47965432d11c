from __future__ import annotations

from typing import Sequence

from ..build import TridiagCoefficients, identity_mpo, tridiag_mpo
from ..tt import MatrixProductOperator, Tolerance, mpo_compose, mpo_kron, mpo_round, mpo_sum
from .grids import FdCoefficients2D, Grid1D

OP_TOL = Tolerance(1e-13)


def fd_coefficients_1d(p: float, s: float, v: float, h: float) -> TridiagCoefficients:
    """Stencil of ``p u'' + s u' + v u`` scaled by ``h**2``."""
    return TridiagCoefficients(h * h * v - 2 * p, p + h * s / 2, p - h * s / 2)


def fd_operator_1d(p: float, s: float, v: float, grid) -> MatrixProductOperator:
    h = grid.h if isinstance(grid, Grid1D) else float(grid[1])
    c = grid.c if isinstance(grid, Grid1D) else int(grid[0])
    return tridiag_mpo(fd_coefficients_1d(p, s, v, h), c)


def fd_operator_2d(coeffs: FdCoefficients2D, grid: Grid1D) -> MatrixProductOperator:
    """``M_{p,s,v} x I + I x M_{q,t,0} + (M_{0,r,0} x I)(I x M_{0,1,0})`` on a square grid.

    Each first-difference factor carries its own ``h**2`` scaling, so the mixed
    product is divided by ``h**2`` to keep every term on the same ``h**2`` scale.
    """
    c, h = grid.c, grid.h
    eye = identity_mpo(c)
    terms = [mpo_kron(fd_operator_1d(coeffs.p, coeffs.s, coeffs.v, grid), eye),
             mpo_kron(eye, fd_operator_1d(coeffs.q, coeffs.t, 0.0, grid))]
    if coeffs.r != 0.0:
        mx = mpo_kron(fd_operator_1d(0.0, coeffs.r, 0.0, grid), eye)
        my = mpo_kron(eye, fd_operator_1d(0.0, 1.0, 0.0, grid))
        terms.append(mpo_compose(mx, my) * (1.0 / (h * h)))
    return mpo_sum(terms, OP_TOL)


def laplacian_nd(c: int, weights: Sequence[float]) -> MatrixProductOperator:
    """``sum_d w_d (I x .. x T x .. x I)`` with ``T = tridiag(-2, 1, 1)``."""
    T = tridiag_mpo((-2.0, 1.0, 1.0), c)
    eye = identity_mpo(c)
    terms = []
    for d, w in enumerate(weights):
        factors = [eye] * len(weights)
        factors[d] = T
        op = mpo_kron(*factors)
        terms.append(op * w if w != 1.0 else op)
    return mpo_sum(terms, OP_TOL)


def kron_terms(*pairs) -> MatrixProductOperator:
    """Round a sum of Kronecker products given as tuples of factors."""
    return mpo_round(mpo_sum([mpo_kron(*p) for p in pairs], None), OP_TOL)
