import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laguerre_riesz.expansion import SpectralCoefficients, evaluate, project
from laguerre_riesz.measure import build_rule, tensor_grid
from laguerre_riesz.special_fn import as_alpha, laguerre_fn_d
from laguerre_riesz.summability import (
    BumpFunction,
    GeometricGrid,
    MultiplierSpec,
    RieszParams,
    ae_threshold,
    apply_multiplier,
    cesaro_mean,
    cesaro_weights,
    critical_index,
    default_t_grid,
    degree_components,
    discretized_norm,
    eigenvalues,
    export_multiplier_trace,
    in_sharpness_range,
    maximal_riesz,
    riesz_mean,
    scalar_window_integral,
    square_function,
    window_gram,
)

ALPHA = as_alpha((0.5, 0.0))


def random_table(seed=0, alpha=ALPHA, N=8):
    z = SpectralCoefficients.zeros(alpha, N)
    rng = np.random.default_rng(seed)
    return z.with_values(rng.standard_normal(len(z.values)) / (1.0 + z.degrees))


# --- multipliers -------------------------------------------------------------------


def test_identity_and_composition():
    c = random_table()
    one = MultiplierSpec(lambda e: 1.0, "one")
    np.testing.assert_array_equal(apply_multiplier(c, one).values, c.values)
    m1 = MultiplierSpec(lambda e: np.exp(-0.1 * e))
    m2 = MultiplierSpec(lambda e: 1.0 / (1.0 + e))
    a = apply_multiplier(apply_multiplier(c, m2), m1).values
    b = apply_multiplier(c, m1 * m2).values
    np.testing.assert_allclose(a, b, rtol=1e-15)


def test_indicator_is_projection():
    c = random_table()
    e3 = eigenvalues(c.alpha, c.N)[3]
    ind = MultiplierSpec(lambda e: (e == e3).astype(float))
    np.testing.assert_array_equal(apply_multiplier(c, ind).values, project(c, 3).values)


def test_multiplier_linear():
    c1, c2 = random_table(1), random_table(2)
    m = MultiplierSpec(lambda e: np.sin(e))
    lhs = apply_multiplier(c1.with_values(2 * c1.values + c2.values), m).values
    rhs = 2 * apply_multiplier(c1, m).values + apply_multiplier(c2, m).values
    np.testing.assert_allclose(lhs, rhs, rtol=1e-14, atol=1e-15)


def test_scalar_only_multiplier():
    c = random_table()
    m = MultiplierSpec(lambda e: math.exp(-e), "scalar")
    e = eigenvalues(c.alpha, c.N)
    np.testing.assert_allclose(apply_multiplier(c, m).values, c.values * np.exp(-e[c.degrees]))


def test_nonfinite_multiplier_rejected():
    c = random_table()
    with pytest.raises(ValueError):
        apply_multiplier(c, MultiplierSpec(lambda e: 1.0 / (e - 5.0)))  # e_0 = 5
    # inactive degrees may be singular
    single = SpectralCoefficients.from_table(ALPHA, 4, {(1, 0): 1.0})
    out = apply_multiplier(single, MultiplierSpec(lambda e: 1.0 / (e - 5.0)))
    assert out[(1, 0)] == 0.25


def test_export_trace(tmp_path):
    p = tmp_path / "trace.csv"
    export_multiplier_trace(p, MultiplierSpec(lambda e: e * e), [1.0, 2.0])
    assert p.read_text().splitlines() == ["e_n,m(e_n)", "1.0,1.0", "2.0,4.0"]


# --- Riesz and Cesaro ------------------------------------------------------------------


def test_riesz_params():
    with pytest.raises(ValueError):
        RieszParams(-0.1, 1.0)
    with pytest.raises(ValueError):
        RieszParams(1.0, 0.0)


def test_riesz_limits():
    c = random_table()
    e = eigenvalues(c.alpha, c.N)
    full = riesz_mean(c, RieszParams(0.0, math.sqrt(e[-1]) * 1.01))
    np.testing.assert_array_equal(full.values, c.values)
    R = math.sqrt(e[0])
    while R * R > e[0]:
        R = np.nextafter(R, 0.0)
    zero = riesz_mean(c, RieszParams(1.5, R))
    assert not np.any(zero.values)


@given(lam=st.floats(0.0, 4.0), R=st.floats(0.5, 10.0), mu=st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_riesz_single_eigen(lam, R, mu):
    c = SpectralCoefficients.from_table(ALPHA, 8, {mu: 1.0})
    e = eigenvalues(ALPHA, 8)[sum(mu)]
    want = max(1.0 - e / (R * R), 0.0) ** lam if e < R * R else 0.0
    assert riesz_mean(c, RieszParams(lam, R))[mu] == pytest.approx(want, rel=1e-14, abs=1e-300)


def test_riesz_is_sharp_truncation_at_lambda0():
    c = random_table()
    e = eigenvalues(c.alpha, c.N)
    for k in range(c.N):
        R = math.sqrt(0.5 * (e[k] + e[k + 1]))
        part = sum(project(c, n).values for n in range(k + 1))
        np.testing.assert_array_equal(riesz_mean(c, RieszParams(0.0, R)).values, part)
        np.testing.assert_array_equal(cesaro_mean(c, 0.0, math.sqrt(k + 0.5)).values, part)


def test_riesz_first_order_bound():
    c = random_table(3)
    e = eigenvalues(c.alpha, c.N)
    x = np.array([[0.4, 1.0], [1.5, 0.3]])
    terms = np.array([abs(v) * np.abs(laguerre_fn_d(m, c.alpha, x)) for m, v in zip(c.indices, c.values)]).sum(axis=0)
    full = evaluate(c, x)
    for lam in (0.5, 1.0, 2.0):
        for R2 in (2 * e[-1], 5 * e[-1], 40 * e[-1]):
            diff = np.abs(evaluate(riesz_mean(c, RieszParams(lam, math.sqrt(R2))), x) - full)
            assert np.all(diff <= lam * e[-1] / R2 * terms + 1e-15)


def test_cesaro_closed_forms():
    R = math.sqrt(7.3)  # floor(R^2) = 7
    w = cesaro_weights(1.0, R, 10)
    np.testing.assert_allclose(w[:8], (7 - np.arange(8) + 1) / 8, rtol=1e-13)
    assert not np.any(w[8:])
    assert np.all(cesaro_weights(0.0, R, 10)[:8] == 1.0)
    with pytest.raises(ValueError):
        cesaro_weights(-1.0, R, 3)


@mp.workdps(30)
def test_cesaro_extended_precision():
    lam, K = 2.5, 10_000
    w = cesaro_weights(lam, math.sqrt(K + 0.25), K)
    A = lambda k: mp.gamma(k + lam + 1) / (mp.gamma(k + 1) * mp.gamma(lam + 1))  # noqa: E731
    AK = A(K)
    for n in [0, 1, 17, 500, 4999, 9000, 9999, 10_000]:
        assert w[n] == pytest.approx(float(A(K - n) / AK), rel=1e-10)


def test_cesaro_on_table():
    c = random_table()
    out = cesaro_mean(c, 1.0, math.sqrt(5.0))
    w = cesaro_weights(1.0, math.sqrt(5.0), c.N)
    np.testing.assert_array_equal(out.values, c.values * w[c.degrees])


# --- maximal operator ------------------------------------------------------------------


def test_geometric_grid():
    g = GeometricGrid(1.0, 10.0, 0.1)
    p = g.points()
    assert p[0] == 1.0 and p[-1] >= 10.0 and p[-2] < 10.0
    f = g.refined().points()
    assert set(p.tolist()) <= set(f.tolist())
    assert g.refined().density == 2 * g.density


def test_maximal_single_eigen():
    mu = (2, 1)
    c = SpectralCoefficients.from_table(ALPHA, 4, {mu: 1.0})
    x = np.array([[0.5, 0.7], [1.2, 2.0]])
    e = eigenvalues(ALPHA, 4)[3]
    g = GeometricGrid(1.0, 30.0, 0.01)
    res = maximal_riesz(c, 1.0, x, g)
    Rmax = res.grid[-1]
    phi = np.abs(laguerre_fn_d(mu, ALPHA, x))
    assert np.all(res.values <= phi * (1 + 1e-14))
    assert np.all(res.values >= phi * (1 - e / Rmax ** 2) - 1e-15)
    assert res.density == pytest.approx(100.0)
    assert len(res.as_mapping()) == 2


def test_maximal_dominates_partial_sum():
    c = random_table(4)
    e = eigenvalues(c.alpha, c.N)
    x = np.random.default_rng(0).uniform(0.05, 3.0, (20, 2))
    res = maximal_riesz(c, 0.0, x, np.array([1.0, 2.0, math.sqrt(e[-1]) * 1.1]))
    assert np.all(res.values >= np.abs(evaluate(c, x)) - 1e-14)


def test_maximal_refinement_monotone():
    for seed in range(5):
        c = random_table(seed)
        e = eigenvalues(c.alpha, c.N)
        x = np.random.default_rng(seed).uniform(0.05, 3.0, (16, 2))
        g = GeometricGrid(math.sqrt(e[0]), 2 * math.sqrt(e[-1]), 0.07)
        for lam in (0.5, 1.0):
            coarse = maximal_riesz(c, lam, x, g).values
            fine = maximal_riesz(c, lam, x, g.refined()).values
            assert np.all(fine >= coarse)


def test_maximal_monotone_in_lambda():
    c = SpectralCoefficients.from_table(ALPHA, 5, {(1, 1): 1.0})
    x = np.array([[0.3, 0.3], [1.0, 2.0]])
    vals = [maximal_riesz(c, lam, x).values for lam in (0.25, 0.5, 1.0, 2.0)]
    for a, b in zip(vals, vals[1:]):
        assert np.all(b <= a)


def test_maximal_warns_on_short_grid():
    c = random_table()
    with pytest.warns(UserWarning, match="does not cover"):
        maximal_riesz(c, 1.0, np.array([[1.0, 1.0]]), np.array([2.0, 3.0]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        maximal_riesz(c, 1.0, np.array([[1.0, 1.0]]))


# --- critical index ---------------------------------------------------------------------


def test_critical_index():
    assert critical_index((0.0,), 2) == 0.0
    assert critical_index((0.0,), 6) == pytest.approx(1 / 6)
    for p in (2, 3, 10, 100):
        assert critical_index((-0.8,), p) == 0.0
    assert ae_threshold((0.0,), 6) == pytest.approx(1 / 12)
    with pytest.raises(ValueError):
        critical_index((0.0,), 1.5)
    assert not in_sharpness_range((-0.8,), 100)
    assert in_sharpness_range((0.0,), 4.5) and not in_sharpness_range((0.0,), 4.0)


# --- square function --------------------------------------------------------------------


def test_bump():
    phi = BumpFunction()
    assert phi(0.125) == 0.0 and phi(0.5) == 0.0 and phi(0.0) == 0.0
    assert phi(5 / 16) == pytest.approx(1.0)
    s = np.linspace(-1, 1, 2001)
    assert np.all(np.abs(phi(s)) <= 1.0)


def test_square_zero_and_validation():
    z = SpectralCoefficients.zeros(ALPHA, 4)
    assert square_function(z, 0.1, (1.0, 1.0)) == 0.0
    c = random_table()
    with pytest.raises(ValueError):
        square_function(c, 0.6, (1.0, 1.0))
    with pytest.raises(ValueError, match="under-resolved"):
        square_function(c, 0.1, (1.0, 1.0), t_grid=np.geomspace(1, 10, 20))


def test_square_single_eigen_separable():
    from scipy import integrate

    mu, delta = (2, 1), 0.1
    c = SpectralCoefficients.from_table(ALPHA, 4, {mu: 1.0})
    x = (0.8, 1.1)
    e = eigenvalues(ALPHA, 4)[3]
    phi = BumpFunction()
    ref, _ = integrate.quad(lambda t: phi((1 - e / t ** 2) / delta) ** 2 / t, math.sqrt(e / (1 - delta / 8)),
                            math.sqrt(e / (1 - delta / 2)), epsabs=1e-14, epsrel=1e-12, limit=200)
    got = square_function(c, delta, x) ** 2
    assert got == pytest.approx(laguerre_fn_d(mu, ALPHA, x) ** 2 * ref, rel=1e-6)
    assert scalar_window_integral(e, e, delta) == pytest.approx(ref, rel=1e-10)


def test_scalar_window_scale_invariance():
    for delta in (0.05, 0.2):
        a = scalar_window_integral(7.0, 7.0, delta)
        assert scalar_window_integral(7.0 * 9.0, 7.0 * 9.0, delta) == pytest.approx(a, rel=1e-12)
        b = scalar_window_integral(7.0, 7.3, delta)
        assert scalar_window_integral(7.0 * 4.0, 7.3 * 4.0, delta) == pytest.approx(b, rel=1e-12)


def test_square_function_matches_gram():
    # sum over rule nodes of S^2 w equals c^T (G o W) c where G is the degree Gram matrix
    alpha = as_alpha((0.5,))
    N, delta = 12, 0.3
    c = random_table(5, alpha, N)
    rule = build_rule(0.5, 40)
    pts = rule.nodes[:, None]
    e = eigenvalues(alpha, N)
    t = default_t_grid(e[0], e[-1], delta, per_window=512)
    S = square_function(c, delta, pts, t_grid=t)
    lhs = float(rule.weights @ S ** 2)
    W = window_gram(e, delta, points=2049)
    # in d = 1 the components c_n phi_n are orthogonal: G is the identity
    rhs = float(np.sum(c.values ** 2 * np.diag(W)))
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_degree_components_sum():
    c = random_table(6)
    x = np.array([[0.2, 0.9], [1.7, 0.4]])
    np.testing.assert_allclose(degree_components(c, x).sum(axis=0), evaluate(c, x), rtol=1e-13)


# --- discretised norm -----------------------------------------------------------------------


def test_discretized_norm():
    for N in (1, 3, 8):
        for q in (2, 3.5):
            assert discretized_norm(lambda x: np.ones_like(x), N, q).value == pytest.approx(1.0)
            ind = lambda x, N=N: (x < 1.0 / N ** 2).astype(float)  # noqa: E731
            assert discretized_norm(ind, N, q).value == pytest.approx(N ** (-2 / q), rel=1e-14)
    ref = math.sqrt(sum((i / 16) ** 2 for i in range(1, 17)) / 16)
    got = discretized_norm(lambda x: x, 4, 2)
    assert got.value == pytest.approx(ref, rel=1e-14) and got.samples_per_cell == 64
    with pytest.raises(ValueError):
        discretized_norm(lambda x: x, 4, 1.5)
