import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laguerre_riesz.measure import (
    BallSpec,
    IntegrationError,
    QuadratureRule,
    WeightSpec,
    ap_constant,
    ap_ladder,
    ball_measure_estimate,
    build_rule,
    circumscribed_cube,
    default_order,
    doubling_constant,
    inner_product,
    inscribed_cube,
    load_rules,
    measure_ball,
    save_rules,
    tensor_grid,
    weighted_lp_norm,
)
from laguerre_riesz.special_fn import laguerre_fn_d, multi_indices


def gauss(pts):
    return np.exp(-0.5 * np.sum(pts * pts, axis=-1))


# --- rules -------------------------------------------------------------------


def test_gamma_integral():
    rule = build_rule(0.5, 20)
    assert rule.integrate(lambda x: np.exp(-x * x)) == pytest.approx(math.gamma(1.5) / 2, rel=1e-12)
    assert np.all(rule.nodes > 0) and np.all(rule.weights > 0)
    assert len(rule.nodes) == rule.order == 20


@pytest.mark.parametrize("a", [-0.9, -0.5, 0.0, 0.5, 2.0, 7.3])
@pytest.mark.parametrize("order", [8, 32, 100])
def test_exactness_sweep(a, order):
    rule = build_rule(a, order)
    for k in range(order):
        # int x^(2a+1) x^(2k) e^(-x^2) dx = Gamma(a+k+1)/2
        log_ref = math.lgamma(a + k + 1) - math.log(2)
        got = rule.weights @ np.exp(2 * k * np.log(rule.nodes) - rule.nodes ** 2 - log_ref)
        assert got == pytest.approx(1.0, rel=1e-12 if k < order - 1 else 1e-11), k


def test_phi0_norm_a2():
    rule = build_rule(2.0, 16)
    assert rule.integrate(lambda x: laguerre_fn_d((0,), (2.0,), x[:, None]) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_rule_validation():
    with pytest.raises(ValueError):
        build_rule(-1.0, 10)
    with pytest.raises(ValueError):
        build_rule(0.0, 1)
    with pytest.raises(ValueError):
        QuadratureRule(np.ones(2), np.ones(3), 0.0, 2)
    assert default_order(10) == 52


def test_integration_error_on_nonfinite():
    rule = build_rule(0.0, 8)
    with pytest.raises(IntegrationError):
        rule.integrate(lambda x: np.full_like(x, np.nan))
    with pytest.raises(IntegrationError):
        with np.errstate(divide="ignore"):
            inner_product(lambda p: 1.0 / (p[:, 0] - p[0, 0]), gauss, (0.0,), 8)


def test_rule_cache_roundtrip(tmp_path):
    path = tmp_path / "rules.txt"
    r1, r2 = build_rule(0.5, 12), build_rule(-0.25, 7)
    save_rules(path, [r1, r2])
    table = load_rules(path)
    assert set(table) == {(0.5, 12), (-0.25, 7)}
    np.testing.assert_array_equal(table[(0.5, 12)].nodes, r1.nodes)
    np.testing.assert_array_equal(table[(0.5, 12)].weights, r1.weights)
    # decimal records are accepted too
    line = " ".join(["0.0", "2"] + [f"{v:.17g}" for v in (*build_rule(0.0, 2).nodes, *build_rule(0.0, 2).weights)])
    path.write_text(line + "\n")
    assert load_rules(path)[(0.0, 2)].order == 2


def test_rule_cache_file_is_filled(tmp_path):
    path = tmp_path / "cache.txt"
    rule = build_rule(1.5, 9, cache_file=str(path))
    assert path.exists()
    again = build_rule(1.5, 9, cache_file=str(path))
    np.testing.assert_array_equal(rule.nodes, again.nodes)


# --- inner products and norms -------------------------------------------------


def test_tensor_orthonormality_d2():
    alpha = (0.5, -0.5)
    pts, w = tensor_grid(alpha, 24)
    idx = multi_indices(6, 2)
    Phi = np.array([laguerre_fn_d(m, alpha, pts) for m in idx])
    G = (Phi * w) @ Phi.T
    assert np.max(np.abs(G - np.eye(len(idx)))) < 1e-9


def test_gaussian_inner_product():
    alpha = (0.0, 1.5)
    ref = math.prod(math.gamma(a + 1) / 2 for a in alpha)
    assert inner_product(gauss, gauss, alpha, 16) == pytest.approx(ref, rel=1e-12)
    f = lambda p: np.sin(p[:, 0]) * gauss(p)  # noqa: E731
    assert inner_product(lambda p: 2 * f(p), gauss, alpha, 16) == 2 * inner_product(f, gauss, alpha, 16)


def test_weighted_lp_norm():
    phi0 = lambda p: laguerre_fn_d((0, 0), (0.5, 0.0), p)  # noqa: E731
    assert weighted_lp_norm(phi0, 2, (0.5, 0.0)) == pytest.approx(1.0, abs=1e-12)
    w0 = WeightSpec("inhomogeneous_beta", 0.0, -1)
    assert weighted_lp_norm(phi0, 3, (0.5, 0.0), w0) == weighted_lp_norm(phi0, 3, (0.5, 0.0))
    with pytest.raises(ValueError):
        weighted_lp_norm(phi0, 0.5, (0.5, 0.0))


@given(c=st.floats(-1e3, 1e3), p=st.sampled_from([1.0, 1.5, 2.0, 4.0]))
def test_norm_homogeneous(c, p):
    f = lambda x: np.cos(x[:, 0]) * gauss(x)  # noqa: E731
    a = weighted_lp_norm(lambda x: c * f(x), p, (0.5,), order=24)
    b = abs(c) * weighted_lp_norm(f, p, (0.5,), order=24)
    assert a == pytest.approx(b, rel=1e-13, abs=1e-300)


def test_weight_spec():
    with pytest.raises(ValueError):
        WeightSpec("cubic")
    with pytest.raises(ValueError):
        WeightSpec("power_beta", 1.0, 0)
    w = WeightSpec("power_beta", 1.5)
    assert w(np.array([[3.0, 4.0]]))[0] == pytest.approx(5.0 ** 1.5)
    assert w.power(-1.0).exponent() == -1.5
    assert WeightSpec()(np.ones((3, 2))).tolist() == [1.0, 1.0, 1.0]


# --- balls and doubling -------------------------------------------------------


def test_ball_validation():
    with pytest.raises(ValueError):
        BallSpec((1.0,), 0.0)
    with pytest.raises(ValueError):
        BallSpec((-1.0,), 1.0)
    with pytest.raises(ValueError):
        BallSpec((1.0,), 1.0, "sphere")


@pytest.mark.parametrize("a", [-0.5, 0.0, 2.0])
def test_ball_at_origin_1d(a):
    R = 1.7
    assert measure_ball(BallSpec((0.0,), R), (a,)) == pytest.approx(R ** (2 * a + 2) / (2 * a + 2), rel=1e-14)


def test_cube_closed_form():
    b = BallSpec((1.0, 0.5), 0.75, "product_cube")
    ref = ((1.75 ** 2 - 0.25 ** 2) / 2) * ((1.25 ** 3 - 0.0) / 3)
    assert measure_ball(b, (0.0, 0.5)) == pytest.approx(ref, rel=1e-14)


def test_ball_qmc_against_quadrature():
    from scipy import integrate

    ball, alpha = BallSpec((1.0, 1.0), 0.8), (0.5, 0.0)
    ref, _ = integrate.dblquad(
        lambda y, x: x ** 2 * y,
        0.2, 1.8,
        lambda x: 1.0 - math.sqrt(max(0.64 - (x - 1.0) ** 2, 0.0)),
        lambda x: 1.0 + math.sqrt(max(0.64 - (x - 1.0) ** 2, 0.0)),
    )
    est = ball_measure_estimate(ball, alpha)
    assert not est.exact and est.converged
    assert abs(est.value - ref) < 5 * est.stderr + 1e-4 * ref


def test_cube_ball_sandwich():
    for center, r in [((1.0, 1.0), 0.8), ((2.0, 0.5), 1.0), ((3.0, 3.0, 3.0), 1.5)]:
        ball = BallSpec(center, r)
        alpha = (0.5,) * len(center)
        mb = measure_ball(ball, alpha)
        assert measure_ball(inscribed_cube(ball), alpha) <= mb <= measure_ball(circumscribed_cube(ball), alpha)


def test_measure_dimension_mismatch():
    with pytest.raises(ValueError):
        measure_ball(BallSpec((1.0, 1.0), 1.0), (0.0,))


@pytest.mark.parametrize("alpha", [(-0.5,), (0.0,), (2.0,), (0.5, 0.5), (0.0, 2.0)])
def test_doubling(alpha):
    d = len(alpha)
    balls = [
        BallSpec((c,) * d, r, "product_cube")
        for c in (0.0, 0.1, 1.0, 5.0, 30.0)
        for r in (0.01, 0.3, 1.0, 4.0, 50.0)
    ]
    C = doubling_constant(alpha, balls, lambdas=(2.0, 4.0, 16.0))
    assert C <= 4.0


def test_doubling_euclidean_balls():
    balls = [BallSpec((c, c), r) for c in (0.5, 2.0) for r in (0.25, 1.0)]
    assert doubling_constant((0.5, 0.0), balls, n_points=2 ** 14) <= 8.0


# --- A_p ------------------------------------------------------------------------


def test_ap_unit_weight():
    balls = [BallSpec((c,), r) for c in (0.5, 3.0) for r in (0.2, 2.0)]
    assert ap_constant(WeightSpec(), 2.0, (0.0,), balls) == pytest.approx(1.0, rel=1e-12)
    balls2 = [BallSpec((1.0, 1.0), 0.5), BallSpec((2.0, 2.0), 0.5, "product_cube")]
    assert ap_constant(WeightSpec(), 3.0, (0.0, 0.5), balls2) == pytest.approx(1.0, rel=1e-12)


def test_ap_validation():
    with pytest.raises(ValueError):
        ap_constant(WeightSpec(), 1.0, (0.0,), [BallSpec((1.0,), 1.0)])
    with pytest.raises(ValueError):
        ap_constant(WeightSpec(), 2.0, (0.0,), [])


def test_ap_inside_interval_bounded():
    vals = ap_ladder(WeightSpec("power_beta", 1.0), 2.0, (0.0,))
    assert vals.max() / vals.min() <= 4.0


def test_ap_outside_interval_grows():
    beta = 2 * (0 + 1) + 0.5
    vals = ap_ladder(WeightSpec("power_beta", beta), 2.0, (0.0,))
    assert np.all(np.diff(vals) > 0)


def test_ap_negative_outside_grows():
    vals = ap_ladder(WeightSpec("power_beta", 2.5, -1), 2.0, (0.0,))
    assert np.all(np.diff(vals) > 0)


def test_ap_degenerate_ball_warns():
    # a zero-measure ball for alpha very close to -1 underflows to zero mass
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        ap_constant(WeightSpec(), 2.0, (0.0,), [BallSpec((0.0,), 1e-320), BallSpec((1.0,), 0.5)])
    assert any("degenerate" in str(w.message) for w in rec)
