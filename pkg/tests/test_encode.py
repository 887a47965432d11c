import numpy as np
import pytest
from hypothesis import given, strategies as st

from qttpde.build import exp_tt
from qttpde.encode import (
    DataSet,
    InterpolationConfig,
    data_driven_tt,
    interpolation_nodes,
    interpolative_tt,
    interpolative_tt_2d,
    lagrange_matrix,
    sampled_tt,
    spline_fit,
)
from qttpde.oracle import AnalyticSolution, analytic_source
from qttpde.tt import tt_to_dense


def fig3(x):
    return np.sin(3 * x) ** 2 + np.cos(5 * x) ** 3


def grid(c):
    return np.arange(2 ** c) / 2 ** c


def test_config_validation():
    with pytest.raises(ValueError):
        InterpolationConfig(M=0)
    with pytest.raises(ValueError):
        InterpolationConfig(c=0)
    with pytest.raises(ValueError):
        InterpolationConfig(node_scheme="random")


@pytest.mark.parametrize("scheme", ["chebyshev-lobatto", "equispaced", "legendre"])
def test_nodes_and_lagrange(scheme):
    nodes = interpolation_nodes(6, scheme)
    assert nodes.shape == (7,) and np.all(np.diff(nodes) > 0)
    assert np.all((nodes >= 0) & (nodes <= 1))
    L = lagrange_matrix(nodes, nodes)
    assert np.allclose(L, np.eye(7), atol=1e-12)


def test_interp_constant():
    for M in (1, 4, 12):
        t = interpolative_tt(lambda x: np.ones_like(x), InterpolationConfig(M, c=6))
        assert np.max(np.abs(tt_to_dense(t) - 1)) <= 1e-13


def test_interp_fig3_function():
    t = interpolative_tt(fig3, InterpolationConfig(24, c=8))
    assert t.n_cores == 8 and t.max_rank <= 25
    assert np.max(np.abs(tt_to_dense(t) - fig3(grid(8)))) <= 1e-8


def test_interp_polynomial_exact():
    M = 6
    coef = np.array([0.3, -1.0, 2.0, 0.5, -0.7, 1.1, 0.25])
    f = lambda x: np.polynomial.polynomial.polyval(x, coef)
    t = interpolative_tt(f, InterpolationConfig(M, c=7))
    assert np.max(np.abs(tt_to_dense(t) - f(grid(7)))) <= 1e-10


def test_interp_2d_separable():
    c, M = 6, 8
    t = interpolative_tt_2d(lambda x, y: np.exp(x) * np.exp(-y), InterpolationConfig(M, c=c))
    x = grid(c)
    ref = np.outer(np.exp(x), np.exp(-x)).ravel()
    assert np.max(np.abs(tt_to_dense(t) - ref)) <= 1e-9


def test_interp_2d_poisson_source():
    c, M = 10, 12
    f = analytic_source(AnalyticSolution("poisson-exp"))
    t = interpolative_tt_2d(f, InterpolationConfig(M, c=c))
    x = grid(c)
    X, Y = np.meshgrid(x, x, indexing="ij")
    assert np.max(np.abs(tt_to_dense(t) - f(X, Y).ravel())) <= 1e-8


def test_interp_2d_zero():
    t = interpolative_tt_2d(lambda x, y: 0 * x * y, InterpolationConfig(4, c=4))
    assert not np.any(tt_to_dense(t))


def test_sampled_tt():
    t = sampled_tt(fig3, 8)
    assert np.max(np.abs(tt_to_dense(t) - fig3(grid(8)))) <= 1e-11


def test_spline_two_points_linear():
    s = spline_fit(DataSet([[0.0, 1.0], [2.0, 5.0]]))
    assert s(0.0) == pytest.approx(1.0) and s(2.0) == pytest.approx(5.0)
    assert s(1.0) == pytest.approx(3.0)
    assert s.domain == (0.0, 2.0)


def test_spline_fig3_samples():
    x = np.linspace(0, 1, 7)
    data = DataSet(np.column_stack([x[::-1], fig3(x[::-1])]))   # unsorted on purpose
    s = spline_fit(data)
    assert np.max(np.abs(s(x) - fig3(x))) <= 1e-12
    assert np.all(np.diff(s.knots) > 0)


def test_spline_fourth_order_refinement():
    f = lambda x: np.sin(2 * x) * np.exp(x)
    xx = np.linspace(0.2, 0.8, 401)   # away from the natural end conditions
    errs = []
    for n in (25, 50, 100):
        x = np.linspace(0, 1, n)
        errs.append(np.max(np.abs(spline_fit(DataSet(np.column_stack([x, f(x)])))(xx) - f(xx))))
    assert errs[1] < 1e-5
    assert errs[0] / errs[1] > 10 and errs[1] / errs[2] > 10


def test_bspline_and_errors():
    x = np.linspace(0, 1, 9)
    s = spline_fit(DataSet(np.column_stack([x, np.cos(x)])), "b-spline", 5)
    assert np.allclose(s(x), np.cos(x), atol=1e-12)
    with pytest.raises(ValueError):
        spline_fit(DataSet([[0.0, 1.0], [0.0, 2.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        spline_fit(DataSet([[0.0, 1.0], [1.0, 2.0], [2.0, 0.0]]), "b-spline", 3)
    with pytest.raises(ValueError):
        DataSet([[0.0, 1.0]])
    with pytest.raises(ValueError):
        DataSet([[0.0, np.nan], [1.0, 1.0]])


def test_2d_splines():
    f = lambda x, y: np.exp(x - y)
    data = DataSet.sample(f, 200, ndim=2, seed=3)
    s = spline_fit(data, "thin-plate")
    assert np.allclose(s(data.points[:, 0], data.points[:, 1]), data.points[:, 2], atol=1e-9)
    g = np.linspace(0, 1, 9)
    X, Y = np.meshgrid(g, g, indexing="ij")
    gd = DataSet(np.column_stack([X.ravel(), Y.ravel(), f(X, Y).ravel()]))
    b = spline_fit(gd, "bicubic")
    assert np.allclose(b(X, Y), f(X, Y), atol=1e-12)
    with pytest.raises(ValueError):
        spline_fit(data, "bicubic")


def test_dataset_csv_roundtrip(tmp_path):
    d1 = DataSet.sample(np.sin, 20, seed=1)
    d1.to_csv(tmp_path / "a.csv")
    assert np.array_equal(DataSet.from_csv(tmp_path / "a.csv").points, d1.points)
    d2 = DataSet.sample(lambda x, y: x * y, 30, ndim=2, seed=1)
    d2.to_csv(tmp_path / "b.csv")
    assert np.array_equal(DataSet.from_csv(tmp_path / "b.csv").points, d2.points)
    assert (tmp_path / "b.csv").read_text().splitlines()[0] == "x,y,value"


def test_data_driven_exp():
    x = np.linspace(0, 1, 64)
    data = DataSet(np.column_stack([x, np.exp(x)]))
    ref = tt_to_dense(exp_tt(1.0, 8))
    # not-a-knot cubic B-spline: fourth-order accurate up to the ends
    t, s = data_driven_tt(data, 8, InterpolationConfig(16), kind="b-spline", degree=3)
    assert np.max(np.abs(tt_to_dense(t) - ref)) <= 1e-8
    assert s.kind == "b-spline"
    # natural end conditions leave an O(h**2) boundary layer
    t, _ = data_driven_tt(data, 8, InterpolationConfig(16))
    assert np.max(np.abs(tt_to_dense(t) - ref)) <= 2 * (1 / 63) ** 2 * np.e / 8


def test_data_driven_two_points():
    t, _ = data_driven_tt(DataSet([[0.0, 1.0], [1.0, 3.0]]), 6, InterpolationConfig(4))
    assert np.allclose(tt_to_dense(t), 1 + 2 * grid(6), atol=1e-12)
    from qttpde.tt import tt_round, Tolerance
    assert tt_round(t, Tolerance(1e-12)).max_rank <= 2


def test_data_driven_domain_mismatch():
    x = np.linspace(0, 1, 10)
    with pytest.raises(ValueError):
        data_driven_tt(DataSet(np.column_stack([x, x])), 5, grid=(0.5, 1 / 32))


def test_data_driven_gridline_source():
    # 64 random samples of the 2D source along y = 0.5, encoded on [0, 1)
    f = analytic_source(AnalyticSolution("poisson-exp"))
    data = DataSet.sample(lambda x: f(x, 0.5), 64, seed=0)
    t, _ = data_driven_tt(data, 10, InterpolationConfig(16))
    x = grid(10)
    assert np.mean((tt_to_dense(t) - f(x, 0.5)) ** 2) <= 1.73e-4


# ---- properties ---------------------------------------------------------------

smooth = [lambda x: np.exp(-x) * np.sin(4 * x), lambda x: 1 / (1 + x * x), fig3]


@given(which=st.integers(0, 2), M=st.integers(1, 24), c=st.integers(1, 9))
def test_prop_rank_bound_and_determinism(which, M, c):
    cfg = InterpolationConfig(M, c=c)
    a = interpolative_tt(smooth[which], cfg)
    b = interpolative_tt(smooth[which], cfg)
    assert a.max_rank <= M + 1
    assert all(np.array_equal(x, y) for x, y in zip(a.cores, b.cores))


@given(which=st.integers(0, 2), c=st.integers(4, 10), shift=st.floats(0, 0.5))
def test_prop_error_monotone_in_M(which, c, shift):
    f = lambda x: smooth[which](x + shift)
    x = grid(c)
    errs = [np.max(np.abs(tt_to_dense(interpolative_tt(f, InterpolationConfig(M, c=c))) - f(x)))
            for M in (4, 8, 16, 24)]
    for a, b in zip(errs, errs[1:]):
        assert b <= a * (1 + 1e-6) + 1e-13


@given(M=st.integers(1, 6), c=st.integers(2, 5), seed=st.integers(0, 1000))
def test_prop_2d_rank_bound(M, c, seed):
    k = np.random.default_rng(seed).uniform(0.5, 3, 2)
    t = interpolative_tt_2d(lambda x, y: np.sin(k[0] * x + k[1] * y * y), InterpolationConfig(M, c=c))
    assert t.max_rank <= (M + 1) ** 2
