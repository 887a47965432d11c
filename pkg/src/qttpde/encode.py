"""Function-to-QTT encoders: sampling + TT-SVD, multiscale interpolation, splines.

A grid is described by an offset and spacing, ``x_k = x0 + k * delta`` for
``k = 0 .. 2**c - 1``.  The multiscale interpolation treats the grid as
``x0 + delta * 2**c * s`` with ``s = 0.x_1 x_2 ... x_c`` in binary.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import (
    BarycentricInterpolator,
    CubicSpline,
    RBFInterpolator,
    RectBivariateSpline,
    make_interp_spline,
)

from .tt import TensorTrain, Tolerance, tt_from_dense, tt_round

NODE_SCHEMES = ("chebyshev-lobatto", "equispaced", "legendre")


@dataclass(frozen=True)
class InterpolationConfig:
    M: int = 16
    node_scheme: str = "chebyshev-lobatto"
    c: int = 8

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if self.node_scheme not in NODE_SCHEMES:
            raise ValueError(f"unknown node scheme {self.node_scheme!r}")


@lru_cache(maxsize=64)
def interpolation_nodes(M: int, scheme: str = "chebyshev-lobatto") -> np.ndarray:
    """``M + 1`` nodes on [0, 1]."""
    j = np.arange(M + 1)
    if scheme == "chebyshev-lobatto":
        return 0.5 * (1.0 - np.cos(np.pi * j / M))
    if scheme == "equispaced":
        return j / M
    if scheme == "legendre":
        x, _ = np.polynomial.legendre.leggauss(M + 1)
        return 0.5 * (x + 1.0)
    raise ValueError(f"unknown node scheme {scheme!r}")


def lagrange_matrix(nodes: np.ndarray, points) -> np.ndarray:
    """``out[p, i] = L_i(points[p])`` for the Lagrange basis on ``nodes``."""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    basis = BarycentricInterpolator(nodes, np.eye(len(nodes)))
    return np.atleast_2d(basis(pts))


@lru_cache(maxsize=64)
def _transfer_cores(M: int, scheme: str):
    """f-independent cores: middle ``L_i((x + th_j)/2)`` and last ``L_i(x/2)``."""
    th = interpolation_nodes(M, scheme)
    mid = np.zeros((M + 1, 2, M + 1))
    last = np.zeros((M + 1, 2, 1))
    for b in (0, 1):
        mid[:, b, :] = lagrange_matrix(th, (b + th) / 2).T
        last[:, b, 0] = lagrange_matrix(th, [b / 2])[0]
    mid.flags.writeable = False
    last.flags.writeable = False
    return mid, last


def _check_2d(f_vals, shape):
    v = np.asarray(f_vals, dtype=float)
    if v.shape != shape:
        v = np.broadcast_to(v, shape)
    return v


def interpolative_tt(f: Callable, cfg: InterpolationConfig, x0: float = 0.0,
                     delta: Optional[float] = None) -> TensorTrain:
    """Multiscale interpolative QTT of ``f`` on ``x_k = x0 + k delta`` (default ``k / 2**c``).

    ``f`` must accept a numpy array.  Internal ranks are at most ``M + 1``.
    """
    c = cfg.c
    if delta is None:
        delta = 2.0 ** -c
    span = delta * 2 ** c
    th = interpolation_nodes(cfg.M, cfg.node_scheme)
    m1 = cfg.M + 1
    if c == 1:
        vals = _check_2d(f(x0 + span * np.array([0.0, 0.5])), (2,))
        return TensorTrain([vals.reshape(1, 2, 1)])
    pts = np.concatenate([th / 2, (1 + th) / 2])
    first = _check_2d(f(x0 + span * pts), (2 * m1,)).reshape(1, 2, m1)
    mid, last = _transfer_cores(cfg.M, cfg.node_scheme)
    return TensorTrain([first] + [mid] * (c - 2) + [last])


def interpolative_tt_2d(f: Callable, cfg: InterpolationConfig,
                        x0: float = 0.0, dx: Optional[float] = None,
                        y0: float = 0.0, dy: Optional[float] = None,
                        tol: Optional[Tolerance] = Tolerance(1e-13)) -> TensorTrain:
    """QTT of ``f(x, y)`` with 2c cores (x block first).

    ``f(x, y) ~ sum_j f(x, eta_j) L_j(y)``: each slice ``f(., eta_j)`` gets a
    multiscale encoding in x and the global Lagrange factor ``L_j`` one in y.
    All ``M + 1`` terms are laid down at once (bond ``(M+1)**2`` inside the x
    block) and rounded when ``tol`` is given.
    """
    c = cfg.c
    if c < 2:
        raise ValueError("interpolative_tt_2d needs c >= 2")
    dx = 2.0 ** -c if dx is None else dx
    dy = 2.0 ** -c if dy is None else dy
    sx, sy = dx * 2 ** c, dy * 2 ** c
    M = cfg.M
    m1 = M + 1
    th = interpolation_nodes(M, cfg.node_scheme)
    mid, last = _transfer_cores(M, cfg.node_scheme)

    # x block: bond index (j, a) = (y-slice, x node)
    px = x0 + sx * np.concatenate([th / 2, (1 + th) / 2])
    py = y0 + sy * th
    X, Y = np.meshgrid(px, py, indexing="ij")
    F = _check_2d(f(X, Y), X.shape)                      # (2*m1 x-points, m1 slices)
    first = F.reshape(2, m1, m1).transpose(0, 2, 1).reshape(1, 2, m1 * m1)
    eye = np.eye(m1)
    xmid = np.einsum("jk,aib->jaikb", eye, mid).reshape(m1 * m1, 2, m1 * m1)
    xlast = np.einsum("jk,ai->jaik", eye, last[:, :, 0]).reshape(m1 * m1, 2, m1)
    # y block: first core carries L_j evaluated on the first-level nodes
    yfirst = np.zeros((m1, 2, m1))
    for b in (0, 1):
        yfirst[:, b, :] = lagrange_matrix(th, (b + th) / 2).T
    cores = [first] + [xmid] * (c - 2) + [xlast] + [yfirst] + [mid] * (c - 2) + [last]
    out = TensorTrain(cores)
    return tt_round(out, tol) if tol is not None else out


def sampled_tt(f: Callable, c: int, tol: Tolerance = Tolerance(), x0: float = 0.0,
               delta: Optional[float] = None) -> TensorTrain:
    """Sample on the grid and compress with TT-SVD."""
    delta = 2.0 ** -c if delta is None else delta
    x = x0 + delta * np.arange(2 ** c)
    return tt_from_dense(np.asarray(f(x), dtype=float), tol)


def sampled_tt_2d(f: Callable, c: int, tol: Tolerance = Tolerance(), x0=0.0, dx=None,
                  y0=0.0, dy=None) -> TensorTrain:
    dx = 2.0 ** -c if dx is None else dx
    dy = 2.0 ** -c if dy is None else dy
    x = x0 + dx * np.arange(2 ** c)
    y = y0 + dy * np.arange(2 ** c)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return tt_from_dense(np.asarray(f(X, Y), dtype=float).reshape(-1), tol)


# ---------------------------------------------------------------------------
# data and splines


@dataclass
class DataSet:
    """Sample points: shape (n, 2) for ``(x, y)`` or (n, 3) for ``(x, y, value)``."""
    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] not in (2, 3):
            raise ValueError("points must have 2 (1D) or 3 (2D) columns")
        if p.shape[0] < 2:
            raise ValueError("need at least 2 points")
        if not np.all(np.isfinite(p)):
            raise ValueError("non-finite data")
        self.points = p

    @property
    def ndim(self) -> int:
        return self.points.shape[1] - 1

    def __len__(self):
        return self.points.shape[0]

    def to_csv(self, path) -> None:
        header = ["x", "y"] if self.ndim == 1 else ["x", "y", "value"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "DataSet":
        with open(Path(path), newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header = [h.strip() for h in rows[0]]
        if header not in (["x", "y"], ["x", "y", "value"]):
            raise ValueError(f"unexpected header {header}")
        return cls(np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float))

    @classmethod
    def sample(cls, f: Callable, n: int, ndim: int = 1, seed: int = 0, domain=(0.0, 1.0)):
        """Uniform random samples of ``f``; the domain endpoints are always included."""
        rng = np.random.default_rng(seed)
        a, b = domain
        if ndim == 1:
            x = np.sort(np.concatenate([[a, b], rng.uniform(a, b, n - 2)]))
            return cls(np.column_stack([x, f(x)]))
        corners = np.array([[a, a], [a, b], [b, a], [b, b]])
        xy = np.vstack([corners, rng.uniform(a, b, (n - 4, 2))])
        return cls(np.column_stack([xy, f(xy[:, 0], xy[:, 1])]))


@dataclass
class SplineModel:
    kind: str
    degree: int
    knots: np.ndarray
    coefficients: np.ndarray
    domain: tuple
    _impl: object = field(repr=False, default=None)

    def __call__(self, *args):
        if self.knots.ndim == 1 and len(args) == 1:
            return self._impl(np.asarray(args[0], dtype=float))
        x, y = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in args))
        if self.kind == "thin-plate":
            return self._impl(np.column_stack([x.ravel(), y.ravel()])).reshape(x.shape)
        return self._impl(x.ravel(), y.ravel(), grid=False).reshape(x.shape)


def spline_fit(data: DataSet, kind: str = "cubic", degree: int = 3) -> SplineModel:
    """Interpolating spline through the data.

    1D kinds: ``cubic`` (natural end conditions) and ``b-spline`` (degree k).
    2D kinds: ``bicubic`` for data on a tensor grid, ``thin-plate`` (radial basis)
    for scattered points.
    """
    p = data.points
    if data.ndim == 1:
        order = np.argsort(p[:, 0], kind="stable")
        x, y = p[order, 0], p[order, 1]
        if np.any(np.diff(x) <= 0):
            raise ValueError("duplicate x values")
        dom = (float(x[0]), float(x[-1]))
        if kind == "cubic":
            s = CubicSpline(x, y, bc_type="natural")
            return SplineModel("cubic", 3, x, s.c, dom, s)
        if kind == "b-spline":
            if len(x) < degree + 1:
                raise ValueError(f"need at least {degree + 1} points for degree {degree}")
            s = make_interp_spline(x, y, k=degree)
            return SplineModel("b-spline", degree, s.t, s.c, dom, s)
        raise ValueError(f"unknown 1D spline kind {kind!r}")

    xs, ys, vs = p[:, 0], p[:, 1], p[:, 2]
    dom = ((float(xs.min()), float(xs.max())), (float(ys.min()), float(ys.max())))
    if kind in ("bicubic", "cubic"):
        ux, uy = np.unique(xs), np.unique(ys)
        if len(ux) * len(uy) != len(p):
            raise ValueError("bicubic spline needs data on a full tensor grid")
        grid = np.full((len(ux), len(uy)), np.nan)
        grid[np.searchsorted(ux, xs), np.searchsorted(uy, ys)] = vs
        if np.isnan(grid).any():
            raise ValueError("bicubic spline needs data on a full tensor grid")
        k = min(degree, len(ux) - 1, len(uy) - 1)
        s = RectBivariateSpline(ux, uy, grid, kx=k, ky=k, s=0)
        tx, ty = s.get_knots()
        return SplineModel("bicubic", k, np.array([tx, ty], dtype=object), s.get_coeffs(), dom, s)
    if kind == "thin-plate":
        pts = np.column_stack([xs, ys])
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("duplicate data points")
        s = RBFInterpolator(pts, vs, kernel="thin_plate_spline", degree=1)
        return SplineModel("thin-plate", degree, pts, vs, dom, s)
    raise ValueError(f"unknown 2D spline kind {kind!r}")


def data_driven_tt(data: DataSet, c: int, cfg: Optional[InterpolationConfig] = None,
                   kind: str = "cubic", degree: int = 3, grid: Optional[tuple] = None):
    """Sort, fit a spline and encode it; returns ``(tt, spline)``.

    By default the data domain ``[start, stop]`` is mapped onto the binary grid
    ``start + (stop - start) * k / 2**c``.  ``grid`` may give an explicit
    ``(x0, delta)`` (or ``(x0, dx, y0, dy)`` in 2D) that must lie inside the domain.
    """
    cfg = InterpolationConfig(c=c) if cfg is None else InterpolationConfig(cfg.M, cfg.node_scheme, c)
    s = spline_fit(data, kind, degree)
    n = 2 ** c
    if data.ndim == 1:
        a, b = s.domain
        if grid is None:
            x0, d = a, (b - a) / n
        else:
            x0, d = grid
            if x0 < a - 1e-12 or x0 + d * n > b + 1e-12:
                raise ValueError("grid interval exceeds the data domain")
        return interpolative_tt(s, cfg, x0, d), s
    (ax, bx), (ay, by) = s.domain
    if grid is None:
        x0, dx, y0, dy = ax, (bx - ax) / n, ay, (by - ay) / n
    else:
        x0, dx, y0, dy = grid
        if (x0 < ax - 1e-12 or x0 + dx * n > bx + 1e-12
                or y0 < ay - 1e-12 or y0 + dy * n > by + 1e-12):
            raise ValueError("grid interval exceeds the data domain")
    return interpolative_tt_2d(s, cfg, x0, dx, y0, dy), s
