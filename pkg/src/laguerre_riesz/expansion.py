"""Laguerre transforms: coefficients, spectral projections and kernels."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from . import _accel
from .measure import IntegrationError, build_rule, default_order, tensor_grid
from .special_fn import (
    AlphaVector,
    as_alpha,
    compositions,
    count_compositions,
    multi_indices,
    tilde_laguerre,
)

COMPOSITION_CAP = 10 ** 6


def _as_points(x, d):
    """(m, d) array of points plus a flag telling whether a single point was given."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (d,):
        raise ValueError(f"points must have trailing dimension {d}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("points must be finite and lie in the closed orthant")
    return x.reshape(-1, d), x.ndim == 1


@dataclass(frozen=True)
class SpectralCoefficients:
    """Coefficients <f, phi_mu^alpha> for all |mu|_1 <= N.

    ``indices`` has shape (M, d) in the canonical order (by degree, then
    lexicographic); ``values`` has shape (M,).  ``residual`` is
    ||f||_2^2 - sum c_mu^2 when produced by :func:`expand`.
    """

    alpha: AlphaVector
    N: int
    indices: np.ndarray
    values: np.ndarray
    residual: float | None = None

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1, self.alpha.d)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if len(idx) != len(vals):
            raise ValueError("indices and values differ in length")
        if len(idx) and (idx.min() < 0 or idx.sum(axis=1).max() > self.N):
            raise ValueError("stored index outside |mu|_1 <= N")
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, alpha, N: int) -> "SpectralCoefficients":
        alpha = as_alpha(alpha)
        idx = np.array(multi_indices(N, alpha.d), dtype=np.int64).reshape(-1, alpha.d)
        return cls(alpha, N, idx, np.zeros(len(idx)))

    @classmethod
    def from_table(cls, alpha, N: int, table: dict) -> "SpectralCoefficients":
        """Full canonical table with entries from ``table`` (missing keys are 0)."""
        out = cls.zeros(alpha, N)
        vals = np.array([float(table.get(tuple(int(v) for v in m), 0.0)) for m in out.indices])
        extra = [k for k in table if sum(k) > N or len(k) != out.alpha.d]
        if extra:
            raise ValueError(f"indices outside the table: {extra[:3]}")
        return cls(out.alpha, N, out.indices, vals)

    @property
    def degrees(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    @property
    def table(self) -> dict:
        return {tuple(int(v) for v in m): float(c) for m, c in zip(self.indices, self.values)}

    def with_values(self, values) -> "SpectralCoefficients":
        return SpectralCoefficients(self.alpha, self.N, self.indices, values)

    def energy(self) -> float:
        return float(np.dot(self.values, self.values))

    def __getitem__(self, mu) -> float:
        return self.table.get(tuple(mu), 0.0)


def _phi_tables(alpha: AlphaVector, nmax: int, pts: np.ndarray) -> list:
    """Per-dimension tables phi_k^{alpha_j}(x_j), each of shape (nmax+1, m)."""
    return [_accel.phi_table(nmax, a, pts[:, j] ** 2) for j, a in enumerate(alpha)]


def expand(f: Callable, alpha, N: int, order: int | None = None) -> SpectralCoefficients:
    """Coefficients of ``f`` up to total degree N by tensor Gauss-Laguerre quadrature.

    ``f`` takes an array of points of shape (m, d).  The truncation residual
    ||f||^2 - sum c^2 is stored on the result.
    """
    alpha = as_alpha(alpha)
    if N < 0:
        raise ValueError("N must be >= 0")
    order = order or default_order(N)
    d = alpha.d
    rules = [build_rule(a, order) for a in alpha]
    pts, w = tensor_grid(alpha, order)
    fv = np.asarray(f(pts), dtype=float).reshape(-1)
    if not np.all(np.isfinite(fv)):
        raise IntegrationError("integrand is not finite at a quadrature node")
    # contract one axis at a time: C[k1..kd] = sum_x w f prod phi_kj(x_j)
    arr = (w * fv).reshape((order,) * d)
    for j, rule in enumerate(rules):
        tab = _accel.phi_table(N, alpha[j], rule.nodes ** 2)  # (N+1, order)
        arr = np.tensordot(tab, arr, axes=([1], [j]))
        arr = np.moveaxis(arr, 0, j)
    idx = np.array(multi_indices(N, d), dtype=np.int64).reshape(-1, d)
    vals = arr[tuple(idx.T)]
    norm2 = float(np.sum(w * fv * fv))
    return SpectralCoefficients(alpha, N, idx, vals, residual=norm2 - float(vals @ vals))


def project(coeffs: SpectralCoefficients, n: int) -> SpectralCoefficients:
    """P_n on a coefficient table: keep only |mu|_1 = n."""
    if n < 0 or n > coeffs.N:
        raise ValueError(f"projection degree {n} outside 0..{coeffs.N}")
    return coeffs.with_values(np.where(coeffs.degrees == n, coeffs.values, 0.0))


def evaluate(coeffs: SpectralCoefficients, x, chunk: int = 4096):
    """sum_mu c_mu phi_mu^alpha(x) at one point or an (m, d) array of points."""
    alpha = coeffs.alpha
    pts, scalar = _as_points(x, alpha.d)
    keep = coeffs.values != 0
    idx, vals = coeffs.indices[keep], coeffs.values[keep]
    out = np.zeros(len(pts))
    if len(vals):
        nmax = int(idx.max())
        for s in range(0, len(pts), chunk):
            p = pts[s:s + chunk]
            tabs = _phi_tables(alpha, nmax, p)
            prod = np.ones((len(idx), len(p)))
            for j, tab in enumerate(tabs):
                prod *= tab[idx[:, j]]
            out[s:s + chunk] = vals @ prod
    return float(out[0]) if scalar else out


def _composition_array(n: int, d: int, cap: int) -> np.ndarray:
    count = count_compositions(n, d)
    if count > cap:
        raise ValueError(f"{count} compositions of {n} into {d} parts exceeds the cap {cap}")
    return np.array(sorted(compositions(n, d)), dtype=np.int64).reshape(-1, d)


def projection_kernel(n: int, alpha, x, y, cap: int = COMPOSITION_CAP) -> float:
    """P_n(x, y) = sum_{|mu|_1 = n} phi_mu(x) phi_mu(y), summed in lexicographic order."""
    alpha = as_alpha(alpha)
    comps = _composition_array(n, alpha.d, cap)
    px, _ = _as_points(x, alpha.d)
    py, _ = _as_points(y, alpha.d)
    tx = _phi_tables(alpha, n, px)
    ty = _phi_tables(alpha, n, py)
    prod = np.ones(len(comps))
    for j in range(alpha.d):
        prod *= tx[j][comps[:, j], 0] * ty[j][comps[:, j], 0]
    return float(prod.sum())


def tilde_kernel(n: int, alpha, x, y, cap: int = COMPOSITION_CAP) -> float:
    """P~_n(x, y) = sum_{|mu|_1 = n} L~_mu(x) L~_mu(y) (polynomial variables)."""
    alpha = as_alpha(alpha)
    comps = _composition_array(n, alpha.d, cap)
    px, _ = _as_points(x, alpha.d)
    py, _ = _as_points(y, alpha.d)
    prod = np.ones(len(comps))
    for j, a in enumerate(alpha):
        tx = np.array([tilde_laguerre(k, a, px[0, j]) for k in range(n + 1)])
        ty = np.array([tilde_laguerre(k, a, py[0, j]) for k in range(n + 1)])
        prod *= tx[comps[:, j]] * ty[comps[:, j]]
    return float(prod.sum())


def kernel_from_tilde(n: int, alpha, x, y) -> float:
    """P_n(x,y) via 2^d / prod Gamma(alpha_i+1) e^{-|x|^2/2} P~_n(x^2, y^2) e^{-|y|^2/2}."""
    alpha = as_alpha(alpha)
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    log_c = alpha.d * math.log(2.0) - sum(math.lgamma(a + 1.0) for a in alpha)
    log_c -= 0.5 * (x @ x + y @ y)
    return math.exp(log_c) * tilde_kernel(n, alpha, x * x, y * y)


# ---------------------------------------------------------------------------
# radial reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    f0: Callable
    alpha: AlphaVector

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_alpha(self.alpha))
        if not self.reduced_type > -1:
            raise ValueError("reduced type |alpha|_1 + d - 1 must exceed -1")

    @property
    def reduced_type(self) -> float:
        return self.alpha.l1 + self.alpha.d - 1.0

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return self.f0(np.sqrt(np.sum(pts * pts, axis=-1)))


def radial_coefficient(profile: RadialProfile, n: int, order: int | None = None) -> float:
    """R_n(f0) = int_0^inf f0(r) phi_n^A(r) r^(2A+1) dr with A the reduced type."""
    A = profile.reduced_type
    rule = build_rule(A, order or default_order(n))
    fv = np.asarray(profile.f0(rule.nodes), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise IntegrationError("radial profile is not finite at a quadrature node")
    return float(np.sum(rule.weights * fv * _accel.phi_last(n, A, rule.nodes ** 2)))


def radial_project(profile: RadialProfile, n: int, r, order: int | None = None):
    """(P_n f)(x) at |x| = r for radial f, via the one-dimensional reduction."""
    A = profile.reduced_type
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or not np.all(np.isfinite(r_arr)):
        raise ValueError("r must be finite and >= 0")
    val = radial_coefficient(profile, n, order) * _accel.phi_last(n, A, r_arr ** 2)
    return float(val) if np.ndim(r) == 0 else val


# ---------------------------------------------------------------------------
# simplex identity
# ---------------------------------------------------------------------------


def simplex_identity_check(n: int, alpha, x, r: float, mc_points: int = 64, seed: int = 0):
    """Both sides of the simplex integral identity for P~_n.

    lhs = int_{Sigma} P~_n(x, r y) y^alpha dy and
    rhs = prod Gamma(alpha_i+1) / Gamma(|alpha|_1+d) L~_n^A(r) L~_n^A(x_1+...+x_d)
    with A = |alpha|_1 + d - 1.  For d = 2 the simplex integral uses a
    Gauss-Jacobi rule with ``mc_points`` nodes (exact for this polynomial
    integrand once mc_points > n).  For d > 2 (experimental) it is a Monte
    Carlo average over Dirichlet(alpha + 1) samples.
    """
    alpha = as_alpha(alpha)
    d = alpha.d
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != d:
        raise ValueError("x dimension differs from alpha")
    log_beta = sum(math.lgamma(a + 1.0) for a in alpha) - math.lgamma(alpha.l1 + d)
    A = alpha.l1 + d - 1.0
    rhs = math.exp(log_beta) * float(tilde_laguerre(n, A, r)) * float(tilde_laguerre(n, A, float(x.sum())))
    if d == 1:
        return tilde_kernel(n, alpha, x, [r]), rhs
    if d == 2:
        a1, a2 = alpha
        t, wt = roots_jacobi(max(int(mc_points), n + 2), a2, a1)
        s = 0.5 * (1.0 + t)
        scale = 2.0 ** (-(a1 + a2 + 1.0))
        vals = [tilde_kernel(n, alpha, x, (r * si, r * (1.0 - si))) for si in s]
        return scale * float(np.dot(wt, vals)), rhs
    rng = np.random.default_rng(seed)
    ys = rng.dirichlet(np.array(alpha.entries) + 1.0, size=int(mc_points))
    vals = [tilde_kernel(n, alpha, x, r * yv) for yv in ys]
    return math.exp(log_beta) * float(np.mean(vals)), rhs


# ---------------------------------------------------------------------------
# coefficient files
# ---------------------------------------------------------------------------


def write_coefficients(path, coeffs: SpectralCoefficients) -> None:
    """Header ``alpha=<list> N=<int>``, then ``mu_1,...,mu_d value`` lines."""
    alpha_s = ",".join(f"{a:.17g}" for a in coeffs.alpha)
    lines = [f"alpha={alpha_s} N={coeffs.N}"]
    for m, c in zip(coeffs.indices, coeffs.values):
        lines.append(",".join(str(int(v)) for v in m) + f" {c:.17g}")
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_coefficients(path) -> SpectralCoefficients:
    with open(path) as fh:
        header = fh.readline().split()
        fields = dict(tok.split("=", 1) for tok in header)
        alpha = as_alpha([float(v) for v in fields["alpha"].split(",")])
        N = int(fields["N"])
        idx, vals = [], []
        for line in fh:
            if not line.strip():
                continue
            mu, val = line.split()
            idx.append([int(v) for v in mu.split(",")])
            vals.append(float(val))
    return SpectralCoefficients(alpha, N, np.array(idx, dtype=np.int64).reshape(-1, alpha.d), np.array(vals))
