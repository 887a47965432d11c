"""Dense reference assembly, direct solves and closed-form solutions.

The assemblers here build matrices entry by entry from the finite-difference
stencils so they share no code with the QTT operator constructions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.special import roots_hermite

DENSE_MAX_UNKNOWNS = 2 ** 13


def dense_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.shape[0] > DENSE_MAX_UNKNOWNS:
        raise MemoryError(f"dense oracle limited to {DENSE_MAX_UNKNOWNS} unknowns")
    return sla.lu_solve(sla.lu_factor(A), b)


# ---------------------------------------------------------------------------
# stencil assembly


def dense_tridiag(n: int, alpha: float, beta: float, gamma: float) -> np.ndarray:
    """diag alpha, superdiagonal beta, subdiagonal gamma."""
    A = np.zeros((n, n))
    for i in range(n):
        A[i, i] = alpha
        if i + 1 < n:
            A[i, i + 1] = beta
            A[i + 1, i] = gamma
    return A


def dense_fd_1d(p: float, s: float, v: float, h: float, n: int) -> np.ndarray:
    """``h**2 (p u'' + s u' + v u)`` with central differences, interior rows only."""
    A = np.zeros((n, n))
    for i in range(n):
        A[i, i] += -2 * p + h * h * v
        if i > 0:
            A[i, i - 1] += p - h * s / 2
        if i < n - 1:
            A[i, i + 1] += p + h * s / 2
    return A


def dense_fd_2d(coeffs, h: float, n: int) -> np.ndarray:
    """Scaled 2D stencil on an ``n x n`` grid, row index ``i * n + j`` (x slow)."""
    p, q, r, s, t, v = (coeffs.p, coeffs.q, coeffs.r, coeffs.s, coeffs.t, coeffs.v)
    N = n * n
    A = np.zeros((N, N))

    def put(i, j, di, dj, val):
        ii, jj = i + di, j + dj
        if 0 <= ii < n and 0 <= jj < n:
            A[i * n + j, ii * n + jj] += val

    for i in range(n):
        for j in range(n):
            put(i, j, 0, 0, -2 * p - 2 * q + h * h * v)
            put(i, j, 1, 0, p + h * s / 2)
            put(i, j, -1, 0, p - h * s / 2)
            put(i, j, 0, 1, q + h * t / 2)
            put(i, j, 0, -1, q - h * t / 2)
            for di in (-1, 1):
                for dj in (-1, 1):
                    put(i, j, di, dj, r * di * dj / 4)
    return A


def dense_laplacian_nd(n: int, weights: Sequence[float]) -> np.ndarray:
    """Weighted sum of second differences on an ``n**d`` grid (C order)."""
    d = len(weights)
    N = n ** d
    A = np.zeros((N, N))
    for flat in range(N):
        idx = np.unravel_index(flat, (n,) * d)
        for axis, w in enumerate(weights):
            A[flat, flat] += -2 * w
            for step in (-1, 1):
                k = list(idx)
                k[axis] += step
                if 0 <= k[axis] < n:
                    A[flat, np.ravel_multi_index(k, (n,) * d)] += w
    return A


def dense_poisson_system(n: int, h: float, f: np.ndarray, left=None, right=None, bottom=None, top=None,
                         weights=(1.0, 1.0)):
    """``A w = h**2 f - b`` for the interior grid; edge arrays are length n (or None)."""
    A = dense_laplacian_nd(n, weights)
    rhs = h * h * np.asarray(f, dtype=float).reshape(-1).copy()
    if len(weights) == 2:
        B = np.zeros((n, n))
        if left is not None:
            B[0, :] += left
        if right is not None:
            B[-1, :] += right
        if bottom is not None:
            B[:, 0] += bottom
        if top is not None:
            B[:, -1] += top
        rhs -= B.reshape(-1)
    return A, rhs


def dense_heat_st_system(n: int, ht: float, hx: float, g0: np.ndarray, g1t=None, g2t=None, nu: float = 1.0):
    """Space-time heat system, unknowns ``w[i_t, j_x]`` flattened t-major."""
    N = n * n
    A = np.zeros((N, N))
    b = np.zeros(N)
    for i in range(n):
        for j in range(n):
            row = i * n + j
            A[row, row] += -1 / ht - 2 * nu / hx ** 2
            if i > 0:
                A[row, row - n] += 1 / ht
            else:
                b[row] -= g0[j] / ht
            if j > 0:
                A[row, row - 1] += nu / hx ** 2
            elif g1t is not None:
                b[row] -= nu * g1t[i] / hx ** 2
            if j < n - 1:
                A[row, row + 1] += nu / hx ** 2
            elif g2t is not None:
                b[row] -= nu * g2t[i] / hx ** 2
    return A, b


def dense_burgers_st_system(n: int, ht: float, hx: float, nu: float, u: np.ndarray, g0: np.ndarray,
                            g1t=None, g2t=None, s: Optional[float] = None):
    """Linearized space-time Burgers system for a given speed field ``u`` (length n*n).

    Row equation: ``(w[i-1,j] - w[i,j])/h_t + nu (w[i,j-1] - 2 w[i,j] + w[i,j+1])/h_x**2
    + u[i,j] s (w[i,j-1] - w[i,j+1]) = 0`` with known values moved to the right.
    """
    s = 1.0 / hx if s is None else s
    A, b = dense_heat_st_system(n, ht, hx, g0, g1t, g2t, nu)
    for i in range(n):
        for j in range(n):
            row = i * n + j
            if j > 0:
                A[row, row - 1] += u[row] * s
            elif g1t is not None:
                b[row] -= u[row] * s * g1t[i]
            if j < n - 1:
                A[row, row + 1] -= u[row] * s
            elif g2t is not None:
                b[row] += u[row] * s * g2t[i]
    return A, b


def dense_burgers_ts_matrices(n: int, h: float, l: float, nu: float):
    """``A = tridiag(1-2r, r, r)`` and ``B = (l/2h)`` centered difference."""
    r = -nu * l / h ** 2
    return dense_tridiag(n, 1 - 2 * r, r, r), dense_tridiag(n, 0.0, l / (2 * h), -l / (2 * h))


def dense_fd_assemble(kind: str, **kw):
    """Dispatch to the dense twin of a QTT assembly by name."""
    table = {
        "tridiag": dense_tridiag,
        "fd1d": dense_fd_1d,
        "fd2d": dense_fd_2d,
        "laplacian": dense_laplacian_nd,
        "poisson": dense_poisson_system,
        "heat-st": dense_heat_st_system,
        "burgers-st": dense_burgers_st_system,
        "burgers-ts": dense_burgers_ts_matrices,
    }
    if kind not in table:
        raise ValueError(f"unknown assembly {kind!r}")
    return table[kind](**kw)


# ---------------------------------------------------------------------------
# closed-form solutions

SOLUTION_TAGS = ("laplace-sinh", "poisson3d-sine", "poisson-exp", "heat-mix", "burgers-wood", "burgers-colehopf")


@dataclass(frozen=True)
class AnalyticSolution:
    tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in SOLUTION_TAGS:
            raise ValueError(f"unknown solution tag {self.tag!r}")

    def __call__(self, *coords):
        return analytic_eval(self, *coords)


def analytic_eval(sol: AnalyticSolution, *coords) -> np.ndarray:
    """Evaluate at broadcastable coordinate arrays.

    Coordinates: ``(x, y)`` for laplace-sinh / poisson-exp, ``(x, y, z)`` for
    poisson3d-sine, ``(x, t)`` for heat-mix and the Burgers solutions.
    """
    p = sol.params
    c = [np.asarray(v, dtype=float) for v in coords]
    if sol.tag == "laplace-sinh":
        k = p.get("k", 3)
        x, y = c
        return np.sin(k * np.pi * x) * np.sinh(k * np.pi * (1 - y))
    if sol.tag == "poisson3d-sine":
        e1, e2 = p.get("eps1", 1.0), p.get("eps2", 1.0)
        x, y, z = c
        return np.sin(np.pi * x) * np.sin(np.pi * y) * np.sin(np.pi * z) / (np.pi ** 2 * (1 + e1 + e2))
    if sol.tag == "poisson-exp":
        x, y = c
        return x * (1 - x) * y * (1 - y) * np.exp(x - y)
    if sol.tag == "heat-mix":
        x, t = c
        return np.exp(-np.pi ** 2 * t / 4) * np.sin(np.pi * x / 2) + 0.5 * np.exp(-4 * np.pi ** 2 * t) * np.sin(2 * np.pi * x)
    if sol.tag == "burgers-wood":
        nu, al = p.get("nu", 0.01), p.get("alpha", 1.25)
        x, t = c
        e = np.exp(-nu * np.pi ** 2 * t)
        return 2 * nu * np.pi * e * np.sin(np.pi * x) / (al + e * np.cos(np.pi * x))
    if sol.tag == "burgers-colehopf":
        x, t = np.broadcast_arrays(*c)
        nu = p.get("nu", 0.01 / np.pi)
        n = p.get("nodes", 100)
        out = np.empty(x.shape)
        for tv in np.unique(t):
            m = t == tv
            out[m] = burgers_colehopf_reference(x[m], float(tv), nu, n)
        return out
    raise ValueError(sol.tag)


def analytic_source(sol: AnalyticSolution) -> Optional[Callable]:
    """Right-hand side ``f`` of the elliptic problems, ``None`` otherwise."""
    if sol.tag == "laplace-sinh":
        return lambda x, y: np.zeros(np.broadcast(x, y).shape)
    if sol.tag == "poisson3d-sine":
        return lambda x, y, z: -np.sin(np.pi * x) * np.sin(np.pi * y) * np.sin(np.pi * z)
    if sol.tag == "poisson-exp":
        return lambda x, y: 2 * x * (y - 1) * (y - 2 * x + x * y + 2) * np.exp(x - y)
    return None


def burgers_colehopf_reference(x, t: float, nu: float = 0.01 / np.pi, nodes: int = 100) -> np.ndarray:
    """Viscous Burgers with ``u(x, 0) = -sin(pi x)`` via Cole-Hopf and Gauss-Hermite quadrature.

    ``u = -sum w_k sin(pi y_k) f(y_k) / sum w_k f(y_k)`` with
    ``y_k = x - sqrt(4 nu t) z_k`` and ``f(y) = exp(-cos(pi y) / (2 pi nu))``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0:
        return -np.sin(np.pi * x)
    z, w = roots_hermite(nodes)
    y = x[:, None] - np.sqrt(4 * nu * t) * z[None, :]
    e = -np.cos(np.pi * y) / (2 * np.pi * nu)
    e -= e.max(axis=1, keepdims=True)
    f = w * np.exp(e)
    return -(np.sin(np.pi * y) * f).sum(axis=1) / f.sum(axis=1)


# eighth-order central difference weights for offsets 0..4
_D1 = (0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280)
_D2 = (-205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560)


def _derivative(sol: AnalyticSolution, coords, axis: int, order: int, step: float):
    out = 0.0
    for k in range(-4, 5):
        w = _D1[abs(k)] * np.sign(k) if order == 1 else _D2[abs(k)]
        if w == 0.0:
            continue
        shifted = list(coords)
        shifted[axis] = shifted[axis] + k * step
        out = out + w * analytic_eval(sol, *shifted)
    return out / step ** order


def pde_residual(sol: AnalyticSolution, *coords, step: float = 3e-3) -> float:
    """Max residual of the governing equation at the given points, relative to the largest term.

    Derivatives use eighth-order central differences with spacing ``step``, so the
    result measures the closed form itself rather than a discretization.
    """
    coords = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in coords])
    p = sol.params
    if sol.tag in ("laplace-sinh", "poisson-exp", "poisson3d-sine"):
        w = [1.0] * len(coords)
        if sol.tag == "poisson3d-sine":
            w = [1.0, p.get("eps1", 1.0), p.get("eps2", 1.0)]
        terms = [wi * _derivative(sol, coords, i, 2, step) for i, wi in enumerate(w)]
        terms.append(-analytic_source(sol)(*coords))
    else:
        nu = {"heat-mix": 1.0, "burgers-wood": p.get("nu", 0.01),
              "burgers-colehopf": p.get("nu", 0.01 / np.pi)}[sol.tag]
        terms = [_derivative(sol, coords, 1, 1, step), -nu * _derivative(sol, coords, 0, 2, step)]
        if sol.tag != "heat-mix":
            terms.append(analytic_eval(sol, *coords) * _derivative(sol, coords, 0, 1, step))
    scale = max(float(np.max(np.abs(t))) for t in terms)
    return float(np.max(np.abs(sum(terms)))) / scale


def mse(a, b) -> float:
    return float(np.mean((np.asarray(a) - np.asarray(b)) ** 2))
