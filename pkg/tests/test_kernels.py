import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from scipy.special import eval_genlaguerre

from laguerre_riesz.kernels import (
    GENERATING_GRID,
    HEAT_GRID,
    MEHLER_GRID,
    HeatParams,
    gaussian_bound_probe,
    generating_function_check,
    heat_kernel_closed,
    heat_kernel_series,
    log_heat_kernel,
    mehler_identity_check,
    probe_grid,
    probe_refinement,
    probe_value,
    series_order,
    write_probe_csv,
)
from laguerre_riesz.measure import BallSpec, build_rule, measure_ball, tensor_grid
from laguerre_riesz.special_fn import eigenvalue, laguerre_fn_1d, laguerre_fn_d


def test_params_validation():
    with pytest.raises(ValueError):
        HeatParams(0.0, (0.0,))
    with pytest.raises(ValueError):
        HeatParams(float("inf"), (0.0,))
    with pytest.raises(ValueError):
        heat_kernel_closed(HeatParams(1.0, (0.0,)), (1.0, 1.0), (1.0,))
    with pytest.raises(ValueError):
        heat_kernel_closed(HeatParams(1.0, (0.0,)), (-1.0,), (1.0,))


@mp.workdps(30)
def test_closed_form_against_mpmath():
    # independent evaluation of the closed form with mpmath's Bessel I
    for t, alpha, x, y in [(0.5, (0.5,), (1.0,), (1.2,)), (0.1, (0.0, 2.0), (0.3, 2.5), (1.7, 0.4))]:
        t_ = mp.mpf(t)
        q = mp.exp(-2 * t_)
        ref = (2 * q / (1 - q ** 2)) ** len(alpha) * mp.exp(
            -0.5 * (1 + q ** 2) / (1 - q ** 2) * sum(mp.mpf(v) ** 2 for v in x + y)
        )
        for a, xi, yi in zip(alpha, x, y):
            ref *= mp.besseli(a, 2 * q * xi * yi / (1 - q ** 2)) / mp.mpf(xi * yi) ** a
        assert heat_kernel_closed(HeatParams(t, alpha), x, y) == pytest.approx(float(ref), rel=1e-12)


def test_symmetry_positivity():
    p = HeatParams(0.3, (0.5, -0.5))
    for x, y in itertools.product([(0.2, 1.0), (1.5, 0.1), (2.9, 2.9)], repeat=2):
        k = heat_kernel_closed(p, x, y)
        assert k > 0
        assert k == pytest.approx(heat_kernel_closed(p, y, x), rel=1e-14)


def test_closed_vs_series_example():
    p = HeatParams(0.5, (0.5,))
    c = heat_kernel_closed(p, (1.0,), (1.2,))
    assert abs(c - heat_kernel_series(p, (1.0,), (1.2,), N=60)) / c < 1e-8


@pytest.mark.parametrize("alpha", [(0.0,), (-0.5, 1.0), (0.5, 0.0, 2.0)])
@pytest.mark.parametrize("t", [0.1, 0.7])
def test_closed_vs_series_grid(alpha, t):
    p = HeatParams(t, alpha)
    rng = np.random.default_rng(len(alpha))
    for _ in range(6):
        x, y = rng.uniform(0.05, 3.0, len(alpha)), rng.uniform(0.05, 3.0, len(alpha))
        c = heat_kernel_closed(p, x, y)
        assert abs(c - heat_kernel_series(p, x, y)) / c < 1e-8


def test_small_argument_limit():
    t, a = 0.4, 1.5
    p = HeatParams(t, (a,))
    q = math.exp(-2 * t)
    lim = 2 * q / (1 - q * q) * (q / (1 - q * q)) ** a / math.gamma(a + 1) * math.exp(-0.5 * (1 + q * q) / (1 - q * q))
    assert heat_kernel_closed(p, (0.0,), (1.0,)) == pytest.approx(lim, rel=1e-13)
    assert heat_kernel_closed(p, (1e-9,), (1.0,)) == pytest.approx(lim, rel=1e-8)


def test_small_time_log_domain():
    # huge prefactor and tiny exponential in opposite directions
    p = HeatParams(1e-4, (0.5,))
    v = log_heat_kernel(p, (1.0,), (1.0,))
    assert math.isfinite(v)
    far = heat_kernel_closed(p, (1.0,), (3.0,))
    assert far == 0.0 or far > 0


def test_series_leading_term():
    p = HeatParams(0.8, (0.5,))
    want = math.exp(-0.8 * eigenvalue(0, (0.5,))) * laguerre_fn_1d(0, 0.5, 1.1) * laguerre_fn_1d(0, 0.5, 0.4)
    assert heat_kernel_series(p, (1.1,), (0.4,), N=0) == pytest.approx(want, rel=1e-14)


def test_series_convergence():
    p = HeatParams(0.5, (0.5,))
    vals = [heat_kernel_series(p, (1.0,), (1.2,), N=n) for n in range(0, 30)]
    diffs = np.abs(np.diff(vals))
    assert diffs[-1] < 1e-12
    assert series_order(0.5, (0.5,)) <= 30
    assert series_order(0.1, (0.0, 0.0)) > series_order(1.0, (0.0, 0.0))


def test_semigroup():
    a = 0.5
    rule = build_rule(a, 200)
    for t, s in [(0.1, 0.2), (0.5, 0.5), (1.0, 0.3)]:
        for x, y in [(0.2, 1.0), (1.5, 1.5), (2.0, 0.6)]:
            k1 = np.array([heat_kernel_closed(HeatParams(t, (a,)), (x,), (z,)) for z in rule.nodes])
            k2 = np.array([heat_kernel_closed(HeatParams(s, (a,)), (z,), (y,)) for z in rule.nodes])
            rhs = heat_kernel_closed(HeatParams(t + s, (a,)), (x,), (y,))
            assert abs(rule.weights @ (k1 * k2) - rhs) / rhs < 1e-7


def test_eigenfunction_reproducing():
    alpha, t, x = (0.5, 0.0), 0.6, (0.7, 1.3)
    pts, w = tensor_grid(alpha, 60)
    p = HeatParams(t, alpha)
    K = np.exp([log_heat_kernel(p, x, y) for y in pts])
    for mu in [(0, 0), (1, 2), (4, 0), (2, 2)]:
        got = float(np.sum(w * K * laguerre_fn_d(mu, alpha, pts)))
        want = math.exp(-t * eigenvalue(sum(mu), alpha)) * laguerre_fn_d(mu, alpha, x)
        assert abs(got - want) < 1e-7


# --- identities -------------------------------------------------------------


def test_mehler_example():
    r = mehler_identity_check(0.5, 0.4, 1.0, 2.0)
    assert r.rel_error < 1e-9 and r.tail < 1e-12


def test_mehler_small_z():
    a = 1.5
    r = mehler_identity_check(a, 1e-12, 1.0, 2.0)
    assert r.lhs == pytest.approx(1 / math.gamma(a + 1), rel=1e-10)
    assert r.rhs == pytest.approx(1 / math.gamma(a + 1), rel=1e-10)


def test_mehler_at_zero():
    # x = 0: L_k^a(0) = Gamma(k+a+1)/(k! Gamma(a+1)), so the sum is a
    # generating function: (1/Gamma(a+1)) sum L_k^a(y) z^k
    a, z, y = 0.75, 0.3, 1.4
    r = mehler_identity_check(a, z, 0.0, y)
    gen = (1 - z) ** (-a - 1) * math.exp(-z * y / (1 - z)) / math.gamma(a + 1)
    assert r.rhs == pytest.approx(gen, rel=1e-13)
    assert r.lhs == pytest.approx(gen, rel=1e-10)


def test_mehler_validation():
    with pytest.raises(ValueError):
        mehler_identity_check(0.5, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        mehler_identity_check(0.5, 0.5, -1.0, 1.0)


def test_identity_grids():
    for a, t, x in itertools.product(*GENERATING_GRID.values()):
        r = generating_function_check(a, t, x)
        assert abs(r.lhs - r.rhs) <= max(r.tail, 1e-9 * abs(r.rhs))
    for a, z, x, y in itertools.product(*MEHLER_GRID.values()):
        assert mehler_identity_check(a, z, x, y).rel_error < 1e-9


def test_generating_function_tail_bound():
    # the stated bound at N = 60 for |t| <= 1/2, x in {0.1, 1, 5}, a in {0, 0.5}
    for a, t, x in itertools.product((0.0, 0.5), (-0.5, -0.25, 0.25, 0.5), (0.1, 1.0, 5.0)):
        r = generating_function_check(a, t, x, N=60)
        # plus the roundoff floor of the partial sum, eps * sum |L_n t^n|
        floor = 64 * np.finfo(float).eps * sum(abs(eval_genlaguerre(n, a, x) * t ** n) for n in range(61))
        assert abs(r.lhs - r.rhs) <= r.tail + floor
    with pytest.raises(ValueError):
        generating_function_check(0.0, 1.0, 1.0)


def test_heat_grid_values():
    assert HEAT_GRID == (0.2, 0.6, 1.0, 1.5, 2.0)


# --- Gaussian bound probe ----------------------------------------------------------


def test_probe_diagonal():
    p = HeatParams(0.5, (0.5,))
    x = np.array([1.2])
    q = measure_ball(BallSpec((1.2,), math.sqrt(0.5), "product_cube"), (0.5,))
    want = heat_kernel_closed(p, x, x) * math.exp(0.5) * q
    assert probe_value(p, x, x, 0.125) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("t", [0.1, 1.0])
def test_probe_refinement_stable(t):
    res = probe_refinement(HeatParams(t, (0.5,)), c=0.125)
    assert all(math.isfinite(r.measured_C) and r.measured_C > 0 for r in res)
    assert res[1].measured_C / res[0].measured_C <= 2.0
    assert [r.grid_level for r in res] == [0, 1]


def test_probe_monotone_in_c():
    p = HeatParams(0.5, (0.0, 0.5))
    grid = probe_grid(2, 0, extent=2.0, base=4)
    vals = [gaussian_bound_probe(p, grid, c).measured_C for c in (0.01, 0.05, 0.125)]
    assert vals[0] <= vals[1] <= vals[2]
    with pytest.raises(ValueError):
        gaussian_bound_probe(p, grid, 0.0)


def test_probe_csv(tmp_path):
    p = HeatParams(0.5, (0.5,))
    res = probe_refinement(p, levels=(0,))
    path = tmp_path / "probe.csv"
    write_probe_csv(path, res)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,c,measured_C,grid_level"
    assert lines[1].startswith("0.5,0.125,") and lines[1].endswith(",0")
