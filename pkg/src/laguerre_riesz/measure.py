"""Quadrature and measure utilities for ((0, inf)^d, x^(2 alpha + 1) dx).

The one-dimensional rule is a generalised Gauss-Laguerre rule in the
variable u = x^2, re-expressed in x with the e^(-u) factor divided into
the weights::

    sum_i w_i g(x_i)  ~  int_0^inf g(x) x^(2a+1) dx

for integrands g with Gaussian decay.  Weights are computed from the
Christoffel function, w_i = 1 / sum_{k<order} phi_k^a(x_i)^2, which never
forms e^(u) explicitly.
"""

from __future__ import annotations

import functools
import math
import os
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.linalg import eigh_tridiagonal
from scipy.stats import qmc

from . import _accel
from .special_fn import AlphaVector, as_alpha


class IntegrationError(RuntimeError):
    """A quadrature produced non-finite values."""


# ---------------------------------------------------------------------------
# 1-d rule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    alpha_param: float
    order: int

    def __post_init__(self):
        if not (len(self.nodes) == len(self.weights) == self.order):
            raise ValueError("node count, weight count and order must agree")

    def integrate(self, g: Callable) -> float:
        vals = np.asarray(g(self.nodes), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise IntegrationError("integrand is not finite at a quadrature node")
        return float(np.dot(self.weights, vals))


def default_order(n_max: int) -> int:
    """Order sufficient for products of two degree-n_max Laguerre functions."""
    return 2 * int(n_max) + 32


def _refine_nodes(order, a, u, steps=3):
    n = order
    c = math.sqrt(n * (n + a))
    for _ in range(steps):
        cur, prev = _accel.pair(n, a, u)
        # u L_n' = n L_n - sqrt(n(n+a)) L_{n-1} in the orthonormal scaling
        deriv = n * cur - c * prev
        u = u - u * cur / deriv
    return u


def _compute_rule(a: float, order: int) -> QuadratureRule:
    if order < 2:
        raise ValueError("quadrature order must be >= 2")
    k = np.arange(order, dtype=float)
    diag = 2.0 * k + a + 1.0
    off = np.sqrt((k[:-1] + 1.0) * (k[:-1] + a + 1.0))
    u = eigh_tridiagonal(diag, off, eigvals_only=True)
    u = _refine_nodes(order, a, u)
    u.sort()
    if not (np.all(np.isfinite(u)) and u[0] > 0 and np.all(np.diff(u) > 0)):
        raise ValueError(
            f"Gauss-Laguerre node computation lost positivity/ordering at order {order}, a={a}"
        )
    weights = 1.0 / _accel.christoffel(order, a, u)
    if not (np.all(np.isfinite(weights)) and np.all(weights > 0)):
        raise ValueError(f"non-positive or non-finite weights at order {order}, a={a}")
    return QuadratureRule(np.sqrt(u), weights, float(a), int(order))


_RULE_FILE_ENV = "LAGUERRE_RIESZ_RULE_CACHE"


def _format_record(rule: QuadratureRule) -> str:
    parts = [float(rule.alpha_param).hex(), str(rule.order)]
    parts += [float(v).hex() for v in rule.nodes]
    parts += [float(v).hex() for v in rule.weights]
    return " ".join(parts)


def _parse_record(line: str) -> QuadratureRule:
    parts = line.split()
    a = float.fromhex(parts[0]) if "0x" in parts[0] else float(parts[0])
    order = int(parts[1])
    vals = [float.fromhex(p) if "0x" in p else float(p) for p in parts[2:]]
    if len(vals) != 2 * order:
        raise ValueError(f"rule record for order {order} has {len(vals)} numbers")
    return QuadratureRule(np.array(vals[:order]), np.array(vals[order:]), a, order)


def save_rules(path, rules: Sequence[QuadratureRule]) -> None:
    """Write rules one per line: ``a order node_1..node_k w_1..w_k`` (hex floats)."""
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        for rule in rules:
            fh.write(_format_record(rule) + "\n")
    os.replace(tmp, path)


def load_rules(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rule = _parse_record(line)
                out[(rule.alpha_param, rule.order)] = rule
    return out


@functools.lru_cache(maxsize=256)
def _cached_rule(a: float, order: int) -> QuadratureRule:
    return _compute_rule(a, order)


def build_rule(a: float, order: int, cache_file=None) -> QuadratureRule:
    """Generalised Gauss-Laguerre rule for int_0^inf g(x) x^(2a+1) dx.

    With ``cache_file`` (or ``$LAGUERRE_RIESZ_RULE_CACHE``) the rule is read
    from the text table when present and appended to it when absent.
    """
    a = float(a)
    if a <= -1.0:
        raise ValueError("rule type must be > -1")
    order = int(order)
    cache_file = cache_file or os.environ.get(_RULE_FILE_ENV)
    if cache_file is None:
        return _cached_rule(a, order)
    table = load_rules(cache_file) if os.path.exists(cache_file) else {}
    if (a, order) in table:
        return table[(a, order)]
    rule = _cached_rule(a, order)
    table[(a, order)] = rule
    save_rules(cache_file, list(table.values()))
    return rule


# ---------------------------------------------------------------------------
# tensor quadrature
# ---------------------------------------------------------------------------


def tensor_grid(alpha, order: int):
    """Nodes (shape (order^d, d)) and weights (order^d,) of the product rule."""
    alpha = as_alpha(alpha)
    rules = [build_rule(a, order) for a in alpha]
    mesh = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    w = functools.reduce(np.multiply.outer, [r.weights for r in rules]).reshape(-1)
    return pts, w


def _evaluate(f, pts):
    vals = np.asarray(f(pts), dtype=float)
    if vals.shape != pts.shape[:1]:
        vals = np.broadcast_to(vals, pts.shape[:1])
    if not np.all(np.isfinite(vals)):
        raise IntegrationError("integrand is not finite at a quadrature node")
    return vals


def inner_product(f: Callable, g: Callable, alpha, order: int) -> float:
    """<f, g> in L^2(d mu_alpha) by tensor Gauss-Laguerre quadrature.

    ``f`` and ``g`` take an array of points of shape (m, d).
    """
    pts, w = tensor_grid(alpha, order)
    return float(np.sum(w * _evaluate(f, pts) * _evaluate(g, pts)))


@dataclass(frozen=True)
class WeightSpec:
    """Weight on (0, inf)^d.

    ``unit``: 1.  ``power_beta``: |x|^beta.  ``inhomogeneous_beta``:
    (1 + |x|)^(sign * beta).
    """

    kind: str = "unit"
    beta: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ("unit", "power_beta", "inhomogeneous_beta"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def exponent(self) -> float:
        return self.sign * self.beta

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        if self.kind == "unit":
            return np.ones_like(r)
        if self.kind == "power_beta":
            with np.errstate(divide="ignore"):
                return r ** self.exponent()
        return (1.0 + r) ** self.exponent()

    def power(self, s: float) -> "WeightSpec":
        """The weight raised to the power ``s`` (w^s stays in the same family)."""
        if self.kind == "unit":
            return self
        e = self.exponent() * s
        return WeightSpec(self.kind, abs(e), 1 if e >= 0 else -1)


def weighted_lp_norm(f: Callable, p: float, alpha, weight: WeightSpec = WeightSpec(), order: int = 96) -> float:
    """(int |f|^p w d mu_alpha)^(1/p) by tensor quadrature."""
    if p < 1:
        raise ValueError("p must be >= 1")
    pts, w = tensor_grid(alpha, order)
    vals = np.abs(_evaluate(f, pts))
    top = float(vals.max())
    if top == 0.0:
        return 0.0
    # scale out the maximum so |f|^p neither underflows nor overflows
    return top * float(np.sum(w * weight(pts) * (vals / top) ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# balls, cubes, doubling, A_p
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallSpec:
    center: tuple
    radius: float
    shape: str = "euclidean_ball"

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if any(v < 0 or not math.isfinite(v) for v in c):
            raise ValueError("center must lie in the closed orthant")
        if self.shape not in ("euclidean_ball", "product_cube"):
            raise ValueError(f"unknown shape {self.shape!r}")

    @property
    def d(self) -> int:
        return len(self.center)

    def scaled(self, lam: float) -> "BallSpec":
        return BallSpec(self.center, self.radius * lam, self.shape)

    def bounding_box(self):
        c = np.array(self.center)
        return np.maximum(c - self.radius, 0.0), c + self.radius


def interval_measure(a: float, lo: float, hi: float) -> float:
    """int_lo^hi x^(2a+1) dx for 0 <= lo <= hi."""
    e = 2.0 * a + 2.0
    return (hi ** e - lo ** e) / e


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    stderr: float = 0.0
    exact: bool = True
    converged: bool = True

    def __float__(self):
        return self.value


def _cube_measure(ball: BallSpec, alpha: AlphaVector) -> float:
    lo, hi = ball.bounding_box()
    return float(np.prod([interval_measure(a, l, h) for a, l, h in zip(alpha, lo, hi)]))


def _ball_samples(ball: BallSpec, n_points: int, seed: int, n_rep: int = 8):
    """Scrambled Sobol points in the bounding box, split into independent replicates."""
    lo, hi = ball.bounding_box()
    per = max(2 ** int(round(math.log2(max(n_points // n_rep, 16)))), 16)
    reps = []
    for r in range(n_rep):
        eng = qmc.Sobol(d=ball.d, scramble=True, seed=np.random.default_rng([seed, r]))
        reps.append(lo + (hi - lo) * eng.random(per))
    return reps, float(np.prod(hi - lo))


def _inside(ball: BallSpec, pts):
    c = np.array(ball.center)
    return np.sum((pts - c) ** 2, axis=-1) < ball.radius ** 2


def _density(alpha: AlphaVector, pts):
    with np.errstate(divide="ignore"):
        return np.prod(pts ** (2.0 * np.array(alpha.entries) + 1.0), axis=-1)


def ball_measure_estimate(
    ball: BallSpec, alpha, n_points: int = 2 ** 16, seed: int = 0, rtol: float = 1e-3
) -> MeasureEstimate:
    """mu_alpha of a ball or product cube, with an error estimate for the QMC path."""
    alpha = as_alpha(alpha)
    if ball.d != alpha.d:
        raise ValueError("ball and alpha dimensions differ")
    if ball.shape == "product_cube" or ball.d == 1:
        return MeasureEstimate(_cube_measure(ball, alpha))
    reps, vol = _ball_samples(ball, n_points, seed)
    vals = np.array([vol * np.mean(_inside(ball, p) * _density(alpha, p)) for p in reps])
    value = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(len(vals)))
    return MeasureEstimate(value, stderr, exact=False, converged=stderr <= rtol * abs(value))


def measure_ball(ball: BallSpec, alpha, n_points: int = 2 ** 16, seed: int = 0) -> float:
    """mu_alpha(B): closed form for cubes (and d = 1), scrambled QMC for Euclidean balls."""
    return ball_measure_estimate(ball, alpha, n_points, seed).value


def inscribed_cube(ball: BallSpec) -> BallSpec:
    return BallSpec(ball.center, ball.radius / math.sqrt(ball.d), "product_cube")


def circumscribed_cube(ball: BallSpec) -> BallSpec:
    return BallSpec(ball.center, ball.radius, "product_cube")


def doubling_constant(alpha, balls: Sequence[BallSpec], lambdas=(2.0,), **kw) -> float:
    """max over balls and lambdas of mu(B(x, lam R)) / (lam^(2|alpha|+2d) mu(B(x, R)))."""
    alpha = as_alpha(alpha)
    expo = 2.0 * alpha.l1 + 2.0 * alpha.d
    best = 0.0
    for ball in balls:
        base = measure_ball(ball, alpha, **kw)
        for lam in lambdas:
            big = measure_ball(ball.scaled(lam), alpha, **kw)
            best = max(best, big / (lam ** expo * base))
    return best


def _power_interval_integral(a, s, lo, hi):
    """int_lo^hi x^(s + 2a + 1) dx, +inf when divergent at 0."""
    e = s + 2.0 * a + 2.0
    if lo == 0.0 and e <= 0:
        return math.inf
    if e == 0:
        return math.log(hi / lo)
    return (hi ** e - lo ** e) / e


def _weighted_integral_1d(weight: WeightSpec, a: float, lo: float, hi: float) -> float:
    if weight.kind == "unit":
        return interval_measure(a, lo, hi)
    if weight.kind == "power_beta":
        return _power_interval_integral(a, weight.exponent(), lo, hi)
    e = weight.exponent()
    val, _ = integrate.quad(lambda x: (1.0 + x) ** e * x ** (2 * a + 1), lo, hi, limit=200)
    return val


def _ball_averages(weight: WeightSpec, p: float, alpha: AlphaVector, ball: BallSpec, n_points, seed):
    dual = weight.power(-1.0 / (p - 1.0))
    if ball.d == 1 or ball.shape == "product_cube":
        lo, hi = ball.bounding_box()
        if ball.d == 1:
            m = interval_measure(alpha[0], lo[0], hi[0])
            i1 = _weighted_integral_1d(weight, alpha[0], lo[0], hi[0])
            i2 = _weighted_integral_1d(dual, alpha[0], lo[0], hi[0])
            return m, i1, i2
    reps, vol = _ball_samples(ball, n_points, seed)
    pts = np.concatenate(reps)
    mask = _inside(ball, pts) if ball.shape == "euclidean_ball" else np.ones(len(pts), bool)
    dens = _density(alpha, pts) * mask
    m = vol * np.mean(dens)
    i1 = vol * np.mean(dens * weight(pts))
    i2 = vol * np.mean(dens * dual(pts))
    return m, i1, i2


def ap_constant(weight: WeightSpec, p: float, alpha, balls: Sequence[BallSpec], n_points=2 ** 14, seed=0) -> float:
    """max over ``balls`` of (avg_B w) (avg_B w^(-1/(p-1)))^(p-1).

    One-dimensional balls use closed forms (power weights) or adaptive
    quadrature; higher-dimensional balls use scrambled QMC.
    """
    if p <= 1:
        raise ValueError("p must be > 1")
    if not balls:
        raise ValueError("need at least one ball")
    alpha = as_alpha(alpha)
    best = 0.0
    for ball in balls:
        m, i1, i2 = _ball_averages(weight, p, alpha, ball, n_points, seed)
        if not m > 0:
            warnings.warn(f"skipping degenerate ball {ball}")
            continue
        val = (i1 / m) * (i2 / m) ** (p - 1.0)
        best = max(best, val)
    return best


def origin_ladder(radii: Sequence[float], d: int = 1, gap: float = 1e-3) -> list:
    """Balls of growing radius whose closure stays ``gap`` away from the coordinate planes.

    As the radius grows, the fixed gap becomes negligible and the balls
    approach origin-centred balls while remaining inside (0, inf)^d.
    """
    out = []
    for r in radii:
        c = gap + r / math.sqrt(d) if d > 1 else gap + r
        out.append(BallSpec((c,) * d, float(r)))
    return out


def ap_ladder(weight: WeightSpec, p: float, alpha, radii=(1, 2, 4, 8, 16, 32, 64), gap: float = 1e-3, **kw):
    """A_p averages along :func:`origin_ladder`; returns an array aligned with ``radii``."""
    alpha = as_alpha(alpha)
    balls = origin_ladder(radii, alpha.d, gap)
    return np.array([ap_constant(weight, p, alpha, [b], **kw) for b in balls])
