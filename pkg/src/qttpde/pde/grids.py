from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ..tt import TensorTrain

GRID_STYLES = ("interior", "spacetime", "closed")


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid with ``N = 2**c`` unknowns.

    styles:
      interior   ``h = (b-a)/(N+1)``, points ``a + i h`` for ``i = 1..N`` (Dirichlet unknowns)
      spacetime  ``h = (b-a)/N``, points ``a + i h`` for ``i = 1..N`` (time axis)
      closed     ``h = (b-a)/(N-1)``, points ``a + i h`` for ``i = 0..N-1``
    """
    a: float
    b: float
    c: int
    style: str = "interior"

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")
        if self.c < 2:
            raise ValueError("need c >= 2")
        if self.style not in GRID_STYLES:
            raise ValueError(f"unknown grid style {self.style!r}")

    @property
    def N(self) -> int:
        return 2 ** self.c

    @property
    def h(self) -> float:
        span = self.b - self.a
        return {"interior": span / (self.N + 1), "spacetime": span / self.N,
                "closed": span / (self.N - 1)}[self.style]

    @property
    def x0(self) -> float:
        return self.a if self.style == "closed" else self.a + self.h

    def points(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.N)


# alias used in docs: a grid is a QTT grid when N = 2**c
QttGrid = Grid1D


@dataclass(frozen=True)
class FdCoefficients2D:
    """``p u_xx + q u_yy + r u_xy + s u_x + t u_y + v u``."""
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0
    s: float = 0.0
    t: float = 0.0
    v: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.p, self.q, self.r, self.s, self.t, self.v])):
            raise ValueError("coefficients must be finite")


Edge = Union[None, float, Callable, TensorTrain]


@dataclass(frozen=True)
class BoundarySpec2D:
    """Edge data for the unit-square style domain: left/right are functions of y,
    bottom/top functions of x.  ``None`` means homogeneous."""
    left: Edge = None
    right: Edge = None
    bottom: Edge = None
    top: Edge = None
    kinds: tuple = ("dirichlet", "dirichlet", "dirichlet", "dirichlet")

    def __post_init__(self):
        for k in self.kinds:
            if k not in ("dirichlet", "neumann"):
                raise ValueError(f"unknown boundary kind {k!r}")

    def check_corners(self, xa, xb, ya, yb, rtol=1e-8):
        """Reject inconsistent corner values where both meeting edges are callables."""
        def val(e, s):
            if e is None:
                return 0.0
            if callable(e):
                return float(np.asarray(e(np.array([s])))[0])
            if isinstance(e, (int, float)):
                return float(e)
            return None
        corners = [(self.left, ya, self.bottom, xa), (self.left, yb, self.top, xa),
                   (self.right, ya, self.bottom, xb), (self.right, yb, self.top, xb)]
        for e1, s1, e2, s2 in corners:
            v1, v2 = val(e1, s1), val(e2, s2)
            if v1 is None or v2 is None:
                continue
            if abs(v1 - v2) > rtol * max(1.0, abs(v1), abs(v2)):
                raise ValueError(f"inconsistent corner values {v1} vs {v2}")


@dataclass(frozen=True)
class TimeSteppingConfig:
    l: float
    timesteps: int
    nu: float = 1.0

    def __post_init__(self):
        if not self.l > 0:
            raise ValueError("time step l must be positive")
        if self.timesteps < 1:
            raise ValueError("timesteps must be >= 1")

    def r(self, h: float) -> float:
        return -self.nu * self.l / h ** 2


@dataclass(frozen=True)
class SpaceTimeConfig:
    runs: int = 2
    nu: float = 1.0
    T: float = 1.0
    advection: str = "unit"         # unit: 1/h times tridiag(0, -1, 1); centered: 1/(2h)
    linearization: str = "rhs"      # rhs: D_1 from b; initial: D_1 from the initial condition

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.advection not in ("unit", "centered"):
            raise ValueError("advection must be 'unit' or 'centered'")
        if self.linearization not in ("rhs", "initial"):
            raise ValueError("linearization must be 'rhs' or 'initial'")
