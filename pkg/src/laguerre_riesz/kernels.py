"""Heat kernel of the Laguerre operator: closed form, eigen-series and
Gaussian-bound diagnostics.

The closed form is

    K(t,x,y) = (2 q / (1 - q^2))^d exp(-(1+q^2)/(2(1-q^2)) (|x|^2+|y|^2))
               prod_i I_{a_i}(2 q x_i y_i / (1-q^2)) / (x_i y_i)^{a_i}

with q = e^{-2t}, assembled in the log domain.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .measure import BallSpec, measure_ball
from .special_fn import AlphaVector, as_alpha, laguerre_poly, log_bessel_i_scaled, multi_indices


@dataclass(frozen=True)
class HeatParams:
    t: float
    alpha: AlphaVector

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError("t must be positive and finite")
        object.__setattr__(self, "alpha", as_alpha(self.alpha))


def _pair(p: HeatParams, x, y):
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    d = p.alpha.d
    if len(x) != d or len(y) != d:
        raise ValueError("point dimension differs from alpha")
    if np.any(x < 0) or np.any(y < 0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("points must be finite and lie in the closed orthant")
    return x, y


def log_heat_kernel(p: HeatParams, x, y) -> float:
    x, y = _pair(p, x, y)
    t = p.t
    one_m = -math.expm1(-4.0 * t)  # 1 - q^2
    log_q = -2.0 * t
    log_ratio = log_q - math.log(one_m)  # log(q / (1 - q^2))
    out = p.alpha.d * (math.log(2.0) + log_ratio)
    out -= 0.5 * (1.0 + math.exp(-4.0 * t)) / one_m * float(x @ x + y @ y)
    for a, xi, yi in zip(p.alpha, x, y):
        z = 2.0 * math.exp(log_ratio) * xi * yi
        # I_a(z)/(x y)^a = [I_a(z)/(z/2)^a] * (q/(1-q^2))^a
        out += log_bessel_i_scaled(a, z) + a * log_ratio
    return out


def heat_kernel_closed(p: HeatParams, x, y) -> float:
    return math.exp(log_heat_kernel(p, x, y))


def series_order(t: float, alpha, tol: float = 1e-12) -> int:
    """Smallest N whose tail bound e^{-4t(N+1)} (N+1)^g C(N+d, d-1) / (1 - e^{-4t}) is below ``tol``.

    g = sum_j max(alpha_j, 0) + 1 absorbs the polynomial growth of the
    Laguerre functions near the origin.
    """
    alpha = as_alpha(alpha)
    g = sum(max(a, 0.0) for a in alpha) + 1.0
    d = alpha.d
    denom = -math.expm1(-4.0 * t)
    N = 0
    while True:
        log_tail = -4.0 * t * (N + 1) + g * math.log(N + 2.0) + math.log(math.comb(N + d, d - 1)) - math.log(denom)
        if log_tail < math.log(tol):
            return N
        N += 1


def heat_kernel_series(p: HeatParams, x, y, N: int | None = None) -> float:
    """sum_{n<=N} e^{-t e_n} P_n(x, y), summing the tensor eigenfunctions by total degree."""
    x, y = _pair(p, x, y)
    alpha = p.alpha
    if N is None:
        N = series_order(p.t, alpha)
    idx = np.array(multi_indices(N, alpha.d), dtype=np.int64).reshape(-1, alpha.d)
    prod = np.ones(len(idx))
    for j, a in enumerate(alpha):
        tx = _accel.phi_table(N, a, np.array([x[j] ** 2]))[:, 0]
        ty = _accel.phi_table(N, a, np.array([y[j] ** 2]))[:, 0]
        prod *= tx[idx[:, j]] * ty[idx[:, j]]
    e = 4.0 * idx.sum(axis=1) + 2.0 * alpha.l1 + 2.0 * alpha.d
    return float(np.sum(np.exp(-p.t * e) * prod))


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------

# published check grids: (a, t, x) for the generating function and
# (a, z, x, y) for the Mehler sum; every combination is evaluated
GENERATING_GRID = {
    "a": (-0.5, 0.0, 0.5, 2.0, 5.0),
    "t": (-0.5, -0.2, 0.2, 0.5),
    "x": (0.0, 0.5, 2.0, 5.0),
}
MEHLER_GRID = {
    "a": (-0.5, 0.0, 0.5, 2.0),
    "z": (0.05, 0.2, 0.4, 0.6),
    "x": (0.0, 0.5, 1.0, 2.0),
    "y": (0.0, 1.0, 3.0),
}
# heat kernel closed form vs series: coordinates of x and y on every axis
HEAT_GRID = (0.2, 0.6, 1.0, 1.5, 2.0)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    tail: float

    @property
    def rel_error(self) -> float:
        return abs(self.lhs - self.rhs) / abs(self.rhs)


def _ortho_poly_table(N: int, a: float, u: float) -> np.ndarray:
    """(k!/Gamma(k+a+1))^{1/2} L_k^a(u) for k = 0..N."""
    phi = _accel.phi_table(N, a, np.array([u]))[:, 0]
    return phi * math.exp(0.5 * u) / math.sqrt(2.0)


def mehler_identity_check(a: float, z: float, x: float, y: float, N: int = 80) -> IdentityCheck:
    """sum_k k!/Gamma(k+a+1) L_k^a(x) L_k^a(y) z^k against the Bessel closed form.

    The right side (1-z)^{-1} (xyz)^{-a/2} e^{-z(x+y)/(1-z)} I_a(2 sqrt(xyz)/(1-z))
    is evaluated as (1-z)^{-a-1} e^{-z(x+y)/(1-z)} I_a(w)/(w/2)^a, which is
    finite at x y = 0.
    """
    a = as_alpha([a])[0]
    if not 0 <= z < 1:
        raise ValueError("z must lie in [0, 1)")
    if x < 0 or y < 0:
        raise ValueError("x and y must be >= 0")
    lx = _ortho_poly_table(N, a, x)
    ly = _ortho_poly_table(N, a, y)
    terms = lx * ly * z ** np.arange(N + 1)
    lhs = float(terms.sum())
    w = 2.0 * math.sqrt(x * y * z) / (1.0 - z)
    rhs = math.exp(
        -(a + 1.0) * math.log1p(-z) - z * (x + y) / (1.0 - z) + log_bessel_i_scaled(a, w)
    )
    tail = float(abs(terms[-1]) * z / (1.0 - z))
    return IdentityCheck(lhs, rhs, tail)


def generating_function_check(a: float, t: float, x: float, N: int = 60) -> IdentityCheck:
    """sum_{n<=N} L_n^a(x) t^n against (1-t)^{-a-1} e^{-xt/(1-t)}."""
    a = as_alpha([a])[0]
    if not abs(t) < 1:
        raise ValueError("|t| must be < 1")
    # L_n^a(x) from the ortho table times sqrt(Gamma(n+a+1)/n!)
    ell = _ortho_poly_table(N, a, x)
    n = np.arange(N + 1)
    scale = np.exp(0.5 * (np.vectorize(math.lgamma)(n + a + 1.0) - np.vectorize(math.lgamma)(n + 1.0)))
    L = ell * scale
    lhs = float(np.sum(L * t ** n))
    rhs = math.exp(-(a + 1.0) * math.log1p(-t) - x * t / (1.0 - t))
    big = max(abs(float(laguerre_poly(k, a, x))) for k in range(N + 1, N + 65))
    tail = 2.0 * abs(t) ** (N + 1) * max(big, float(np.abs(L).max()))
    return IdentityCheck(lhs, rhs, tail)


# ---------------------------------------------------------------------------
# Gaussian bound probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    t: float
    c: float
    measured_C: float
    grid_level: int


def probe_value(p: HeatParams, x, y, c: float) -> float:
    """K(t,x,y) e^{dt} mu(Q(x, sqrt t)) exp(c |x-y|^2 / t)."""
    x, y = _pair(p, x, y)
    q = measure_ball(BallSpec(tuple(x), math.sqrt(p.t), "product_cube"), p.alpha)
    diff = x - y
    return math.exp(log_heat_kernel(p, x, y) + p.alpha.d * p.t + c * float(diff @ diff) / p.t) * q


def gaussian_bound_probe(p: HeatParams, grid: Iterable, c: float = 0.125, grid_level: int = 0) -> ProbeResult:
    """Max of :func:`probe_value` over the (x, y) pairs in ``grid``."""
    if not c > 0:
        raise ValueError("c must be positive")
    best = max(probe_value(p, x, y, c) for x, y in grid)
    return ProbeResult(p.t, c, best, grid_level)


def probe_grid(d: int, level: int, extent: float = 4.0, base: int = 8) -> list:
    """All pairs from a product grid on (0, extent]^d with base * 2^level points per axis."""
    m = base * 2 ** level
    axis = extent * np.arange(1, m + 1) / m
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return [(x, y) for x in mesh for y in mesh]


def probe_refinement(p: HeatParams, c: float = 0.125, levels: Sequence[int] = (0, 1), extent: float = 4.0):
    return [gaussian_bound_probe(p, probe_grid(p.alpha.d, lv, extent), c, lv) for lv in levels]


def write_probe_csv(path, results: Sequence[ProbeResult]) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "c", "measured_C", "grid_level"])
        for r in results:
            w.writerow([repr(r.t), repr(r.c), repr(r.measured_C), r.grid_level])
    os.replace(tmp, path)
