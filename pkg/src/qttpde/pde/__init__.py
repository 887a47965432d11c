"""Finite-difference operators and PDE solvers in QTT form."""
from .burgers import burgers_st, burgers_ts
from .grids import (
    BoundarySpec2D,
    FdCoefficients2D,
    Grid1D,
    QttGrid,
    SpaceTimeConfig,
    TimeSteppingConfig,
)
from .heat import Trajectory, gaussian_pair, heat2d_tdbc, heat_st_1d, heat_ts_1d
from .io import dump_csv, load_tt, save_tt
from .metrics import grid_mse, train_mse
from .operators import fd_operator_1d, fd_operator_2d
from .poisson import poisson_solve

__all__ = [
    "BoundarySpec2D", "FdCoefficients2D", "Grid1D", "QttGrid", "SpaceTimeConfig", "TimeSteppingConfig",
    "Trajectory", "burgers_st", "burgers_ts", "dump_csv", "fd_operator_1d", "fd_operator_2d",
    "gaussian_pair", "grid_mse", "heat2d_tdbc", "heat_st_1d", "heat_ts_1d", "load_tt",
    "poisson_solve", "save_tt", "train_mse",
]
