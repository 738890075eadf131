"""Diagonal spectral multipliers: Riesz and Cesaro means, maximal Riesz
operator, square function and the critical index.

A multiplier m acts on a coefficient table by c_mu -> m(e_{|mu|_1}) c_mu
with e_n = 4n + 2|alpha|_1 + 2d.
"""

from __future__ import annotations

import csv
import math
import os
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from . import _accel
from .expansion import SpectralCoefficients, _as_points
from .special_fn import AlphaVector, as_alpha


def eigenvalues(alpha: AlphaVector, N: int) -> np.ndarray:
    """e_0 .. e_N."""
    return 4.0 * np.arange(N + 1) + 2.0 * alpha.l1 + 2.0 * alpha.d


@dataclass(frozen=True)
class MultiplierSpec:
    """A scalar function of the eigenvalue, evaluated elementwise."""

    fn: Callable
    tag: str = "multiplier"

    def __call__(self, e):
        e = np.asarray(e, dtype=float)
        try:
            out = np.asarray(self.fn(e), dtype=float)
            if out.shape != e.shape:
                out = np.broadcast_to(out, e.shape).copy()
        except (TypeError, ValueError):
            out = np.array([float(self.fn(float(v))) for v in e.reshape(-1)]).reshape(e.shape)
        return out

    def __mul__(self, other: "MultiplierSpec") -> "MultiplierSpec":
        return MultiplierSpec(lambda e: self(e) * other(e), f"{self.tag}*{other.tag}")


def degree_factors(coeffs: SpectralCoefficients, m: MultiplierSpec) -> np.ndarray:
    """m(e_n) for n = 0..N; non-finite values on active degrees are rejected."""
    e = eigenvalues(coeffs.alpha, coeffs.N)
    fac = m(e)
    active = np.zeros(coeffs.N + 1, bool)
    active[np.unique(coeffs.degrees[coeffs.values != 0])] = True
    bad = active & ~np.isfinite(fac)
    if bad.any():
        raise ValueError(f"multiplier {m.tag!r} is not finite at eigenvalues {e[bad][:3]}")
    return np.where(active, fac, 0.0)


def apply_multiplier(coeffs: SpectralCoefficients, m: MultiplierSpec) -> SpectralCoefficients:
    fac = degree_factors(coeffs, m)
    return coeffs.with_values(coeffs.values * fac[coeffs.degrees])


def export_multiplier_trace(path, m: MultiplierSpec, e) -> None:
    """Write ``e_n,m(e_n)`` rows for audit."""
    e = np.asarray(e, dtype=float)
    vals = m(e)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["e_n", "m(e_n)"])
        for a, b in zip(e, vals):
            w.writerow([repr(float(a)), repr(float(b))])
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Riesz and Cesaro means
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RieszParams:
    lam: float
    R: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("Riesz order lambda must be >= 0")
        if not self.R > 0:
            raise ValueError("R must be positive")


def riesz_factor(e, lam: float, R: float):
    """(1 - e/R^2)_+^lam, with 0^0 read as 0 outside the open support."""
    base = 1.0 - np.asarray(e, dtype=float) / (R * R)
    pos = base > 0
    return np.where(pos, np.power(np.where(pos, base, 1.0), lam), 0.0)


def riesz_multiplier(p: RieszParams) -> MultiplierSpec:
    return MultiplierSpec(lambda e: riesz_factor(e, p.lam, p.R), f"riesz(lam={p.lam},R={p.R})")


def riesz_mean(coeffs: SpectralCoefficients, p: RieszParams) -> SpectralCoefficients:
    return apply_multiplier(coeffs, riesz_multiplier(p))


def cesaro_weights(lam: float, R: float, N: int) -> np.ndarray:
    """A_{K-n}(lam)/A_K(lam) for n = 0..N, K = floor(R^2); zero for n > K."""
    if lam < 0:
        raise ValueError("Cesaro order must be >= 0")
    K = math.floor(R * R)
    n = np.arange(N + 1)
    out = np.zeros(N + 1)
    k = (K - n[n <= K]).astype(float)
    lg = np.vectorize(math.lgamma)
    # A_k / A_K with A_k(lam) = Gamma(k+lam+1) / (Gamma(k+1) Gamma(lam+1))
    out[n <= K] = np.exp(lg(k + lam + 1.0) - lg(k + 1.0) - math.lgamma(K + lam + 1.0) + math.lgamma(K + 1.0))
    return out


def cesaro_mean(coeffs: SpectralCoefficients, lam: float, R: float) -> SpectralCoefficients:
    """Cesaro mean of order lam, indexing by degree with the floor(R^2) cutoff."""
    w = cesaro_weights(lam, R, coeffs.N)
    return coeffs.with_values(coeffs.values * w[coeffs.degrees])


# ---------------------------------------------------------------------------
# pointwise helpers
# ---------------------------------------------------------------------------


def degree_components(coeffs: SpectralCoefficients, x) -> np.ndarray:
    """(P_n f)(x) for n = 0..N; shape (N+1, m) for m points."""
    pts, _ = _as_points(x, coeffs.alpha.d)
    out = np.zeros((coeffs.N + 1, len(pts)))
    keep = coeffs.values != 0
    idx, vals = coeffs.indices[keep], coeffs.values[keep]
    if not len(vals):
        return out
    nmax = int(idx.max())
    prod = np.ones((len(idx), len(pts))) * vals[:, None]
    for j, a in enumerate(coeffs.alpha):
        prod *= _accel.phi_table(nmax, a, pts[:, j] ** 2)[idx[:, j]]
    np.add.at(out, idx.sum(axis=1), prod)
    return out


@dataclass(frozen=True)
class GeometricGrid:
    """Points lo * exp(k * log_step), k = 0..K, the last one >= hi.

    Halving ``log_step`` yields a superset of the points (bitwise), so
    refinement is monotone for any max over the grid.
    """

    lo: float
    hi: float
    log_step: float

    def points(self) -> np.ndarray:
        K = int(math.ceil(math.log(self.hi / self.lo) / self.log_step - 1e-12))
        return self.lo * np.exp(np.arange(K + 1) * self.log_step)

    def refined(self, factor: int = 2) -> "GeometricGrid":
        # anchor at the last coarse point so none of the coarse points is lost
        return GeometricGrid(self.lo, float(self.points()[-1]), self.log_step / factor)

    @property
    def density(self) -> float:
        """Points per unit of log R."""
        return 1.0 / self.log_step


def default_riesz_grid(alpha: AlphaVector, N: int, margin: float = 1.0) -> GeometricGrid:
    """Ratio 1 + 1/(4N) grid over [sqrt(e_0), sqrt(e_N) (1 + margin)]."""
    e = eigenvalues(alpha, N)
    return GeometricGrid(math.sqrt(e[0]), math.sqrt(e[-1]) * (1.0 + margin), math.log1p(1.0 / (4.0 * max(N, 1))))


@dataclass(frozen=True)
class MaximalResult:
    points: np.ndarray
    values: np.ndarray
    grid: np.ndarray
    density: float

    def as_mapping(self) -> dict:
        return {tuple(float(v) for v in p): float(s) for p, s in zip(self.points, self.values)}


def maximal_riesz(coeffs: SpectralCoefficients, lam: float, x_grid, R_grid=None) -> MaximalResult:
    """max over the R grid of |S_R^lam f(x)| for every x in ``x_grid``.

    ``R_grid`` is a :class:`GeometricGrid`, an explicit array, or None for
    :func:`default_riesz_grid`.
    """
    RieszParams(lam, 1.0)
    if R_grid is None:
        R_grid = default_riesz_grid(coeffs.alpha, coeffs.N)
    if isinstance(R_grid, GeometricGrid):
        density = R_grid.density
        R = R_grid.points()
    else:
        R = np.sort(np.asarray(R_grid, dtype=float))
        density = float(len(R) / max(math.log(R[-1] / R[0]), 1e-300)) if len(R) > 1 else 0.0
    e = eigenvalues(coeffs.alpha, coeffs.N)
    active = np.unique(coeffs.degrees[coeffs.values != 0])
    if len(active) and (R[-1] ** 2 <= e[active[-1]] or R[0] ** 2 > e[active[0]] * (1.0 + 1e-12)):
        warnings.warn("R grid does not cover the active spectrum")
    pts, _ = _as_points(x_grid, coeffs.alpha.d)
    comp = degree_components(coeffs, pts)
    best = np.zeros(len(pts))
    # fixed-order sum over degrees: the value at one R must not depend on
    # which other R share its block (BLAS blocking would break refinement
    # monotonicity at the last bit)
    step = max(1, (1 << 21) // max(comp.size, 1))
    for s in range(0, len(R), step):
        M = riesz_factor(e[None, :], lam, R[s:s + step, None])  # (r, N+1)
        S = np.zeros((len(M), len(pts)))
        for n in range(len(e)):
            S += M[:, n, None] * comp[None, n, :]
        best = np.maximum(best, np.abs(S).max(axis=0))
    return MaximalResult(pts, best, R, density)


# ---------------------------------------------------------------------------
# critical index
# ---------------------------------------------------------------------------


def critical_index(alpha, p: float) -> float:
    """lambda(alpha, p) = max(2(|alpha|_1+d)|1/2-1/p| - 1/2, 0) for p >= 2."""
    if p < 2:
        raise ValueError("p must be >= 2")
    alpha = as_alpha(alpha)
    A = alpha.l1 + alpha.d
    return max(2.0 * A * abs(0.5 - 1.0 / p) - 0.5, 0.0)


def ae_threshold(alpha, p: float) -> float:
    """lambda(alpha, p) / 2: the order above which a.e. convergence holds."""
    return 0.5 * critical_index(alpha, p)


def in_sharpness_range(alpha, p: float) -> bool:
    """p > (4|alpha|_1+4d)/(2|alpha|_1+2d-1), the range where the threshold is sharp."""
    alpha = as_alpha(alpha)
    A = alpha.l1 + alpha.d
    if 2.0 * A <= 1.0:
        return False
    return p > 4.0 * A / (2.0 * A - 1.0)


# ---------------------------------------------------------------------------
# square function
# ---------------------------------------------------------------------------

SUPPORT = (0.125, 0.5)


@dataclass(frozen=True)
class BumpFunction:
    """Smooth bump exp(1 - 1/(1-y^2)) carried to [1/8, 1/2], max 1 at 5/16."""

    lo: float = SUPPORT[0]
    hi: float = SUPPORT[1]
    smoothness: str = "C_infinity"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        mid, half = 0.5 * (self.lo + self.hi), 0.5 * (self.hi - self.lo)
        y = (s - mid) / half
        inside = np.abs(y) < 1.0
        yy = np.where(inside, y, 0.0)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - yy * yy)), 0.0)
        return out if out.ndim else float(out)


def sq_multiplier(phi: BumpFunction, delta: float, t) -> MultiplierSpec:
    return MultiplierSpec(lambda e: phi((1.0 - e / (t * t)) / delta), f"bump(delta={delta},t={t})")


def log_window(e: float, delta: float, phi: BumpFunction = BumpFunction()):
    """log t interval where phi(delta^-1 (1 - e/t^2)) can be non-zero."""
    return 0.5 * math.log(e / (1.0 - delta * phi.lo)), 0.5 * math.log(e / (1.0 - delta * phi.hi))


def default_t_grid(e_lo: float, e_hi: float, delta: float, phi: BumpFunction = BumpFunction(), per_window: int = 64):
    a, _ = log_window(e_lo, delta, phi)
    w0, w1 = log_window(1.0, delta, phi)
    step = (w1 - w0) / per_window
    _, b = log_window(e_hi, delta, phi)
    K = int(math.ceil((b - a) / step)) + 2
    return np.exp(a - step + step * np.arange(K + 1))


def _check_resolution(t, e_active, delta, phi, minimum=8):
    logt = np.log(t)
    for e in e_active:
        lo, hi = log_window(float(e), delta, phi)
        count = np.count_nonzero((logt > lo) & (logt < hi))
        if count < minimum:
            raise ValueError(
                f"t grid under-resolved: {count} points across the window of e={e} (need >= {minimum})"
            )


def square_function(
    coeffs: SpectralCoefficients,
    delta: float,
    x,
    phi: BumpFunction = BumpFunction(),
    t_grid=None,
    per_window: int = 64,
):
    """(int_0^inf |phi(delta^-1 (1 - L/t^2)) f(x)|^2 dt/t)^(1/2), trapezoid in log t."""
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    pts, scalar = _as_points(x, coeffs.alpha.d)
    e = eigenvalues(coeffs.alpha, coeffs.N)
    active = np.unique(coeffs.degrees[coeffs.values != 0])
    if not len(active):
        return 0.0 if scalar else np.zeros(len(pts))
    if t_grid is None:
        t_grid = default_t_grid(e[active[0]], e[active[-1]], delta, phi, per_window)
    t = np.asarray(t_grid, dtype=float)
    _check_resolution(t, e[active], delta, phi)
    comp = degree_components(coeffs, pts)[active]
    ea = e[active]
    s = np.log(t)
    sq = np.zeros((len(t), len(pts)))
    for i in range(0, len(t), 2048):
        tt = t[i:i + 2048, None]
        M = phi((1.0 - ea[None, :] / (tt * tt)) / delta)
        sq[i:i + 2048] = (M @ comp) ** 2
    out = np.sqrt(trapezoid(sq, s, axis=0))
    return float(out[0]) if scalar else out


def scalar_window_integral(e_n: float, e_m: float, delta: float, phi: BumpFunction = BumpFunction(), points: int = 257) -> float:
    """int phi(delta^-1 (1 - e_n/t^2)) phi(delta^-1 (1 - e_m/t^2)) dt/t.

    The integrand is smooth and compactly supported in log t, so the
    trapezoid rule over the window of e_n converges spectrally.
    """
    lo, hi = log_window(e_n, delta, phi)
    s = np.linspace(lo, hi, points)
    t2 = np.exp(2.0 * s)
    vals = phi((1.0 - e_n / t2) / delta) * phi((1.0 - e_m / t2) / delta)
    return float(trapezoid(vals, s))


def window_gram(e: np.ndarray, delta: float, phi: BumpFunction = BumpFunction(), points: int = 257) -> np.ndarray:
    """W[n, m] = int m_t(e_n) m_t(e_m) dt/t for the square-function multipliers."""
    e = np.asarray(e, dtype=float)
    n = len(e)
    W = np.zeros((n, n))
    for i in range(n):
        lo, hi = log_window(e[i], delta, phi)
        s = np.linspace(lo, hi, points)
        t2 = np.exp(2.0 * s)
        # only eigenvalues whose window overlaps can contribute
        j0 = np.searchsorted(e, t2[0] * (1.0 - delta * phi.hi), side="left")
        j1 = np.searchsorted(e, t2[-1] * (1.0 - delta * phi.lo), side="right")
        mi = phi((1.0 - e[i] / t2) / delta)
        for j in range(max(j0, 0), min(j1, n)):
            W[i, j] = trapezoid(mi * phi((1.0 - e[j] / t2) / delta), s)
    return 0.5 * (W + W.T)


# ---------------------------------------------------------------------------
# discretised norm
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampledNorm:
    """Lower estimate of a sup-based norm, with the sampling density used."""

    value: float
    samples_per_cell: int

    def __float__(self):
        return self.value


def discretized_norm(F: Callable, N: int, q: float, samples_per_cell: int = 64) -> SampledNorm:
    """((1/N^2) sum_i sup_{cell_i} |F|^q)^(1/q) over the N^2 cells of [0, 1].

    Each sup is a max over ``samples_per_cell + 1`` equispaced points of the
    closed cell, which equals the sup over the half-open cell for
    continuous F.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if N < 1:
        raise ValueError("N must be >= 1")
    cells = N * N
    frac = np.linspace(0.0, 1.0, samples_per_cell + 1)
    sups = np.empty(cells)
    for s in range(0, cells, 4096):
        i = np.arange(s, min(s + 4096, cells))
        x = (i[:, None] + frac[None, :]) / cells
        vals = np.abs(np.asarray(F(x), dtype=float))
        sups[i] = vals.max(axis=1)
    return SampledNorm(float(np.mean(sups ** q) ** (1.0 / q)), samples_per_cell)
