"""Turning user data (callables, constants, trains) into trains on a solver grid."""
from __future__ import annotations

import numpy as np

from ..build import exp_affine_tt
from ..encode import InterpolationConfig, interpolative_tt, interpolative_tt_2d, sampled_tt, sampled_tt_2d
from ..tt import TensorTrain, Tolerance, tt_scale, tt_zeros
from .grids import Grid1D

ENCODERS = ("interp", "ttsvd")


def encode_1d(f, grid: Grid1D, encoder: str = "interp", nodes: int = 24,
              tol: Tolerance = Tolerance(1e-12)) -> TensorTrain:
    if isinstance(f, TensorTrain):
        if f.n_cores != grid.c:
            raise ValueError("train does not match the grid")
        return f
    if f is None:
        return tt_zeros(grid.c)
    if np.isscalar(f):
        return tt_scale(exp_affine_tt(0.0, grid.c), float(f))
    if encoder == "ttsvd":
        return sampled_tt(f, grid.c, tol, grid.x0, grid.h)
    if encoder == "interp":
        return interpolative_tt(f, InterpolationConfig(nodes, c=grid.c), grid.x0, grid.h)
    raise ValueError(f"unknown encoder {encoder!r}")


def encode_2d(f, gx: Grid1D, gy: Grid1D, encoder: str = "interp", nodes: int = 16,
              tol: Tolerance = Tolerance(1e-12)) -> TensorTrain:
    if isinstance(f, TensorTrain):
        if f.n_cores != gx.c + gy.c:
            raise ValueError("train does not match the grid")
        return f
    if f is None:
        return tt_zeros(gx.c + gy.c)
    if gx.c != gy.c:
        raise ValueError("2D encoders need equal cores per dimension")
    if encoder == "ttsvd":
        return sampled_tt_2d(f, gx.c, tol, gx.x0, gx.h, gy.x0, gy.h)
    if encoder == "interp":
        return interpolative_tt_2d(f, InterpolationConfig(nodes, c=gx.c), gx.x0, gx.h, gy.x0, gy.h)
    raise ValueError(f"unknown encoder {encoder!r}")
