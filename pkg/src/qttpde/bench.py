"""Named benchmark problems, a runner and CSV/JSON emission."""
from __future__ import annotations

import csv
import io
import json
import math
import time
import traceback
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .als import GuessStrategy, SolverConfig
from .build import exp_affine_tt, shifted_sine_params, sine_tt
from .encode import DataSet, InterpolationConfig, data_driven_tt
from .oracle import AnalyticSolution, analytic_eval, analytic_source, burgers_colehopf_reference
from .pde import (
    BoundarySpec2D,
    Grid1D,
    SpaceTimeConfig,
    TimeSteppingConfig,
    burgers_st,
    burgers_ts,
    gaussian_pair,
    grid_mse,
    heat2d_tdbc,
    heat_st_1d,
    heat_ts_1d,
    poisson_solve,
    train_mse,
)
from .pde.encoding import encode_1d
from .tt import Tolerance, kron_concat, tt_entries, tt_scale, tt_to_dense

CSV_COLUMNS = ["problem", "params", "cores_per_dim", "timesteps", "runs", "method", "sweeps",
               "time_s", "mse", "max_rank"]


@dataclass(frozen=True)
class ProblemSpec:
    id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in REGISTRY:
            raise ValueError(f"unknown problem {self.id!r}; known: {', '.join(REGISTRY)}")
        entry = REGISTRY[self.id]
        unknown = set(self.params) - set(entry.defaults)
        if unknown:
            raise ValueError(f"unknown parameters for {self.id}: {sorted(unknown)}")

    def resolved(self) -> dict:
        p = dict(REGISTRY[self.id].defaults)
        p.update({k: v for k, v in self.params.items() if v is not None})
        REGISTRY[self.id].validate(p)
        return p


@dataclass
class RunRecord:
    problem: str
    params: dict
    cores_per_dim: int
    timesteps: Optional[int]
    runs: Optional[int]
    method: str
    sweeps: int
    time_s: float
    mse: float
    max_rank: int
    residuals: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    ok: bool = True
    error: str = ""


@dataclass(frozen=True)
class _Entry:
    runner: Callable
    defaults: dict
    description: str
    reference: str

    def validate(self, p):
        if not 2 <= int(p["cores"]) <= 20:
            raise ValueError("cores per dimension must be in [2, 20]")
        if p.get("timesteps") is not None and int(p["timesteps"]) < 1:
            raise ValueError("timesteps must be >= 1")
        if p.get("runs") is not None and int(p["runs"]) < 1:
            raise ValueError("runs must be >= 1")
        if p["method"] not in ("als", "mals"):
            raise ValueError("method must be als or mals")
        if int(p["sweeps"]) < 1:
            raise ValueError("sweeps must be >= 1")
        if p.get("encoder") not in (None, "analytic", "ttsvd", "interp"):
            raise ValueError("encoder must be analytic, ttsvd or interp")


def _cfg(p) -> SolverConfig:
    return SolverConfig(method=p["method"], sweeps=int(p["sweeps"]),
                        trunc=Tolerance(float(p["trunc"]), p.get("max_rank")), seed=int(p["seed"]))


def _guess(p) -> GuessStrategy:
    return GuessStrategy("random-ramp", step=2, max_rank=int(p.get("guess_rank", 12)))


def _common(**kw):
    base = {"cores": 6, "timesteps": None, "runs": None, "method": "mals", "sweeps": 2,
            "trunc": 1e-12, "max_rank": None, "seed": 0, "encoder": "analytic", "nodes": 16,
            "guess_rank": 12}
    base.update(kw)
    return base


# ---------------------------------------------------------------------------
# problem runners: each returns (solution-ish, result dict) with timing of
# assembly + solve only


def _run_problem1(p):
    c, k = int(p["cores"]), float(p["k"])
    g = Grid1D(0.0, 1.0, c)
    sol = AnalyticSolution("laplace-sinh", {"k": k})
    t0 = time.perf_counter()
    if p["encoder"] == "analytic":
        bottom = tt_scale(sine_tt(shifted_sine_params(k * np.pi, c)), np.sinh(k * np.pi))
    else:
        bottom = encode_1d(lambda x: np.sin(k * np.pi * x) * np.sinh(k * np.pi), g, p["encoder"], int(p["nodes"]))
    x, d = poisson_solve(None, BoundarySpec2D(bottom=bottom), g, _cfg(p), guess_strategy=_guess(p),
                         return_info=True)
    elapsed = time.perf_counter() - t0
    xs = g.points()
    return elapsed, grid_mse(x, sol, [xs, xs]), x.max_rank, d, {}


def _sine3(c, dims):
    s = sine_tt(shifted_sine_params(np.pi, c))
    return kron_concat(*([s] * dims))


def _run_problem2(p):
    c = int(p["cores"])
    e1, e2 = float(p["eps1"]), float(p["eps2"])
    g = Grid1D(0.0, 1.0, c)
    sol = AnalyticSolution("poisson3d-sine", {"eps1": e1, "eps2": e2})
    t0 = time.perf_counter()
    if p["encoder"] == "analytic":
        f = tt_scale(_sine3(c, 3), -1.0)
    else:
        f = analytic_source(sol)
    x, d = poisson_solve(f, BoundarySpec2D(), g, _cfg(p), dims=3, anisotropy=(e1, e2),
                         guess_strategy=_guess(p), return_info=True)
    elapsed = time.perf_counter() - t0
    xs = g.points()
    return elapsed, grid_mse(x, sol, [xs, xs, xs]), x.max_rank, d, {}


def _run_problem3(p):
    c = int(p["cores"])
    g = Grid1D(0.0, 1.0, c)
    sol = AnalyticSolution("poisson-exp")
    enc = "ttsvd" if p["encoder"] == "analytic" else p["encoder"]
    t0 = time.perf_counter()
    x, d = poisson_solve(analytic_source(sol), BoundarySpec2D(), g, _cfg(p), encoder=enc,
                         nodes=int(p["nodes"]), guess_strategy=_guess(p), return_info=True)
    elapsed = time.perf_counter() - t0
    xs = g.points()
    return elapsed, grid_mse(x, sol, [xs, xs]), x.max_rank, d, {}


def _run_poisson_data(p):
    c = int(p["cores"])
    g = Grid1D(0.0, 1.0, c)
    sol = AnalyticSolution("poisson-exp")
    if p.get("data"):
        data = DataSet.from_csv(p["data"])
    else:
        data = DataSet.sample(analytic_source(sol), int(p["datapoints"]), ndim=2, seed=int(p["seed"]))
    t0 = time.perf_counter()
    f, _ = data_driven_tt(data, c, InterpolationConfig(int(p["nodes"]), c=c), kind=p["spline"],
                          grid=(g.x0, g.h, g.x0, g.h))
    t_enc = time.perf_counter() - t0
    x, d = poisson_solve(f, BoundarySpec2D(), g, _cfg(p), guess_strategy=_guess(p), return_info=True)
    elapsed = time.perf_counter() - t0
    xs = g.points()
    return elapsed, grid_mse(x, sol, [xs, xs]), x.max_rank, d, {"timings": {"encode": t_enc}}


def _heat_exact():
    sol = AnalyticSolution("heat-mix")
    return sol, (lambda x: analytic_eval(sol, x, 0.0)), (lambda t: 0.0 * np.asarray(t)), (lambda t: analytic_eval(sol, 1.0, t))


def _run_heat_ts(p):
    c, steps = int(p["cores"]), int(p["timesteps"])
    g = Grid1D(0.0, 1.0, c)
    sol, g0, g1, g2 = _heat_exact()
    t0 = time.perf_counter()
    tr = heat_ts_1d(g0, g1, g2, g, TimeSteppingConfig(1.0 / steps, steps), _cfg(p),
                    encoder="interp" if p["encoder"] == "analytic" else p["encoder"], nodes=int(p["nodes"]))
    elapsed = time.perf_counter() - t0
    xs = g.points()
    errs = [np.mean((tt_to_dense(w) - analytic_eval(sol, xs, t)) ** 2) for w, t in zip(tr.states, tr.times)]
    res = [d.final_residual for d in tr.diagnostics]
    return elapsed, float(np.mean(errs)), max(w.max_rank for w in tr.states), res, {}


def _run_heat_st(p):
    c = int(p["cores"])
    g = Grid1D(0.0, 1.0, c)
    sol, g0, g1, g2 = _heat_exact()
    t0 = time.perf_counter()
    x, d = heat_st_1d(g0, g1, g2, g, _cfg(p), encoder="interp" if p["encoder"] == "analytic" else p["encoder"],
                      nodes=int(p["nodes"]), return_info=True,
                      guess_strategy=_guess(p))
    elapsed = time.perf_counter() - t0
    gt = Grid1D(0.0, 1.0, c, "spacetime")
    return elapsed, grid_mse(x, lambda t, xx: analytic_eval(sol, xx, t), [gt.points(), g.points()]), x.max_rank, d, {}


def heat2d_reference(c, steps, alpha=0.6):
    """Sparse direct implicit stepping of the same discrete system (small grids)."""
    g = Grid1D(0.0, 1.0, c)
    n, h, l = g.N, g.h, 1.0 / steps
    r = -alpha * l / h ** 2
    T = sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1])
    I = sp.eye(n)
    A = (sp.eye(n * n) + r * (sp.kron(T, I) + sp.kron(I, T))).tocsc()
    lu = spla.splu(A)
    left, top = gaussian_pair(1.0), gaussian_pair(1.5)
    xs = g.points()
    w = np.zeros(n * n)
    out = []
    for k in range(steps):
        t = (k + 1) * l
        B = np.zeros((n, n))
        B[0, :] += left(xs, t)
        B[:, -1] += top(xs, t)
        w = lu.solve(w - r * B.reshape(-1))
        out.append(w)
    return out


def _run_heat2d(p):
    c, steps = int(p["cores"]), int(p["timesteps"])
    g = Grid1D(0.0, 1.0, c)
    t0 = time.perf_counter()
    tr = heat2d_tdbc(g, TimeSteppingConfig(1.0 / steps, steps), float(p["alpha"]),
                     left=gaussian_pair(1.0), top=gaussian_pair(1.5), cfg=_cfg(p), nodes=int(p["nodes"]))
    elapsed = time.perf_counter() - t0
    mse = float("nan")
    if c <= 7:
        ref = heat2d_reference(c, steps, float(p["alpha"]))
        mse = float(np.mean([np.mean((tt_to_dense(w) - r) ** 2) for w, r in zip(tr.states, ref)]))
    return elapsed, mse, max(w.max_rank for w in tr.states), [d.final_residual for d in tr.diagnostics], \
        {"timings": dict(tr.timings)}


def _wood(p):
    sol = AnalyticSolution("burgers-wood", {"nu": float(p["nu"]), "alpha": float(p["alpha"])})
    return sol, (lambda x: analytic_eval(sol, x, 0.0))


def _run_burgers_ts(p):
    c, steps = int(p["cores"]), int(p["timesteps"])
    g = Grid1D(0.0, 1.0, c)
    sol, g0 = _wood(p)
    t0 = time.perf_counter()
    tr = burgers_ts(g0, None, None, float(p["nu"]), g, TimeSteppingConfig(1.0 / steps, steps), _cfg(p),
                    encoder="interp" if p["encoder"] == "analytic" else p["encoder"], nodes=int(p["nodes"]))
    elapsed = time.perf_counter() - t0
    xs = g.points()
    errs = [np.mean((tt_to_dense(w) - analytic_eval(sol, xs, t)) ** 2) for w, t in zip(tr.states, tr.times)]
    return elapsed, float(np.mean(errs)), max(w.max_rank for w in tr.states), \
        [d.final_residual for d in tr.diagnostics], {}


def _st_config(p):
    return SpaceTimeConfig(runs=int(p["runs"]), nu=float(p["nu"]), advection=p["advection"],
                           linearization=p["linearization"])


def _run_burgers_st(p):
    c = int(p["cores"])
    g = Grid1D(0.0, 1.0, c)
    sol, g0 = _wood(p)
    t0 = time.perf_counter()
    its, ds = burgers_st(g0, None, None, float(p["nu"]), g, _st_config(p), _cfg(p),
                         d_tol=Tolerance(float(p["d_trunc"])),
                         encoder="interp" if p["encoder"] == "analytic" else p["encoder"],
                         nodes=int(p["nodes"]), return_info=True)
    elapsed = time.perf_counter() - t0
    gt = Grid1D(0.0, 1.0, c, "spacetime")
    f = lambda t, x: analytic_eval(sol, x, t)
    series = [grid_mse(w, f, [gt.points(), g.points()]) for w in its]
    return elapsed, series[-1], its[-1].max_rank, [d.final_residual for d in ds], {"extra": {"mse_by_run": series}}


def _run_problem4(p):
    c = int(p["cores"])
    nu = float(p["nu"])
    g = Grid1D(-1.0, 1.0, c)
    t0 = time.perf_counter()
    its, ds = burgers_st(lambda x: -np.sin(np.pi * x), None, None, nu, g, _st_config(p), _cfg(p),
                         d_tol=Tolerance(float(p["d_trunc"])),
                         encoder="interp" if p["encoder"] == "analytic" else p["encoder"],
                         nodes=int(p["nodes"]), return_info=True)
    elapsed = time.perf_counter() - t0
    # run-vs-run convergence (explicitly labelled: compares the solver with itself)
    diffs = {f"{a}v{a + 1}": train_mse(its[a - 1], its[a]) for a in range(1, len(its))}
    mse = diffs[f"{len(its) - 1}v{len(its)}"] if len(its) > 1 else float("nan")
    gt = Grid1D(0.0, 1.0, c, "spacetime")
    ref = {}
    xs = g.points()
    rng = np.random.default_rng(0)
    cols = np.sort(rng.choice(g.N, size=min(g.N, 256), replace=False))
    for frac in (1 / 6, 2 / 6, 3 / 6, 4 / 6, 5 / 6, 1.0):
        i = int(round(frac * gt.N)) - 1
        idx = i * g.N + cols
        vals = tt_entries(its[-1], idx)
        exact = burgers_colehopf_reference(xs[cols], gt.points()[i], nu)
        ref[f"t={gt.points()[i]:.4f}"] = float(np.mean((vals - exact) ** 2))
    extra = {"run_differences": diffs, "colehopf_slice_mse": ref, "mse_kind": "run-vs-run"}
    return elapsed, mse, its[-1].max_rank, [d.final_residual for d in ds], {"extra": extra}


REGISTRY = {
    "problem1": _Entry(_run_problem1, _common(cores=10, k=3), "2D Laplace, sinh solution", "laplace-sinh"),
    "problem2-iso": _Entry(_run_problem2, _common(cores=4, eps1=1.0, eps2=1.0),
                           "3D Poisson, isotropic", "poisson3d-sine"),
    "problem2-aniso": _Entry(_run_problem2, _common(cores=4, eps1=1e-3, eps2=1e-4),
                             "3D Poisson, anisotropic", "poisson3d-sine"),
    "problem3": _Entry(_run_problem3, _common(cores=5), "2D Poisson with exponential source", "poisson-exp"),
    "problem4": _Entry(_run_problem4, _common(cores=10, runs=8, nu=0.01 / math.pi, sweeps=3, trunc=1e-6,
                                              d_trunc=1e-6, advection="unit", linearization="rhs",
                                              encoder="interp", nodes=24),
                       "space-time Burgers, -sin(pi x) initial data", "run-vs-run + Cole-Hopf slices"),
    "heat1d-ts": _Entry(_run_heat_ts, _common(cores=6, timesteps=512, sweeps=1, nodes=24, encoder="interp"),
                        "1D heat, implicit time stepping", "heat-mix"),
    "heat1d-st": _Entry(_run_heat_st, _common(cores=6, sweeps=4, nodes=24, encoder="interp"),
                        "1D heat, space-time", "heat-mix"),
    "heat2d-tdbc": _Entry(_run_heat2d, _common(cores=5, timesteps=100, alpha=0.6, sweeps=1, nodes=12,
                                               trunc=1e-10, encoder="interp"),
                          "2D heat with moving Gaussian boundary sources", "sparse direct stepping (c <= 7)"),
    "burgers-ts": _Entry(_run_burgers_ts, _common(cores=6, timesteps=128, nu=0.01, alpha=1.25, sweeps=1,
                                                  nodes=24, encoder="interp"),
                         "Burgers (Wood solution), time stepping", "burgers-wood"),
    "burgers-st": _Entry(_run_burgers_st, _common(cores=7, runs=2, nu=0.01, alpha=1.25, sweeps=3,
                                                  trunc=1e-10, d_trunc=1e-12, advection="unit",
                                                  linearization="initial", nodes=24, encoder="interp"),
                         "Burgers (Wood solution), space-time", "burgers-wood"),
    "poisson-data": _Entry(_run_poisson_data, _common(cores=10, datapoints=256, spline="thin-plate", data=None,
                                                      nodes=12, config="best", encoder="interp"),
                           "Poisson with a source learned from scattered samples", "poisson-exp"),
}

# tuned presets for the data-driven problem
DATA_PRESETS = {
    "fast": {"method": "als", "sweeps": 1, "nodes": 8, "guess_rank": 4, "trunc": 1e-6},
    "best": {"method": "mals", "sweeps": 2, "nodes": 12, "guess_rank": 8, "trunc": 1e-6},
}


_COLUMN_PARAMS = ("cores", "timesteps", "runs", "method", "sweeps")


def run_problem(spec: ProblemSpec) -> RunRecord:
    p = spec.resolved()
    if spec.id == "poisson-data":
        preset = DATA_PRESETS.get(p["config"], {})
        for k, v in preset.items():
            if k not in spec.params or spec.params[k] is None:
                p[k] = v
    shown = {k: v for k, v in p.items() if k not in _COLUMN_PARAMS}
    rec = RunRecord(problem=spec.id, params=_jsonable(shown), cores_per_dim=int(p["cores"]),
                    timesteps=p.get("timesteps"), runs=p.get("runs"), method=p["method"],
                    sweeps=int(p["sweeps"]), time_s=0.0, mse=float("nan"), max_rank=0)
    try:
        elapsed, mse, rank, diag, more = REGISTRY[spec.id].runner(p)
        rec.time_s = float(elapsed)
        rec.mse = float(mse)
        rec.max_rank = int(rank)
        if isinstance(diag, list):
            rec.residuals = [float(v) for v in diag]
        elif diag is not None:
            rec.residuals = [float(v) for v in diag.residuals]
        rec.timings = more.get("timings", {})
        rec.extra = more.get("extra", {})
    except Exception as exc:  # a failed run is recorded, not raised
        rec.ok = False
        rec.error = f"{type(exc).__name__}: {exc}"
        rec.extra = {"traceback": traceback.format_exc(limit=5)}
    return rec


SWEEP_AXES = {"cores": "cores", "timesteps": "timesteps", "runs": "runs", "datapoints": "datapoints"}


def run_sweep(spec: ProblemSpec, axis: str, values) -> list[RunRecord]:
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {sorted(SWEEP_AXES)}")
    out = []
    for v in values:
        params = dict(spec.params)
        params[SWEEP_AXES[axis]] = v
        out.append(run_problem(ProblemSpec(spec.id, params)))
    return out


def _jsonable(d):
    return json.loads(json.dumps(d, sort_keys=True, default=str))


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.problem, json.dumps(r.params, sort_keys=True), r.cores_per_dim, _fmt(r.timesteps),
                    _fmt(r.runs), r.method, r.sweeps, _fmt(r.time_s), _fmt(r.mse), r.max_rank])
    return buf.getvalue()


def to_json(records) -> str:
    return json.dumps([asdict(r) for r in records], indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def emit(records, fmt: str = "csv", path=None) -> str:
    """Serialize records; writes to ``path`` when given and returns the text."""
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "json":
        text = to_json(records)
    else:
        raise ValueError("format must be csv or json")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def parse_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
