"""Laguerre polynomials and functions, modified Bessel functions, envelopes.

All normalisation constants are formed from log-Gamma differences; the
Laguerre functions themselves come from the scaled orthonormal recurrence
in :mod:`laguerre_riesz._accel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from . import _accel

#: tail rate of the exponential-tail envelope (must stay below ~0.069, the WKB decay rate at u = 3nu/2)
ENVELOPE_GAMMA = 1.0 / 16.0


# ---------------------------------------------------------------------------
# index and parameter types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaVector:
    """Type parameter alpha in (-1, inf)^d."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(float(a) for a in np.atleast_1d(self.entries))
        if len(entries) < 1:
            raise ValueError("alpha must have at least one entry")
        for a in entries:
            if not math.isfinite(a) or a <= -1.0:
                raise ValueError(f"every alpha entry must be finite and > -1, got {a}")
        object.__setattr__(self, "entries", entries)

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def l1(self) -> float:
        return float(sum(self.entries))

    @property
    def reduced_type(self) -> float:
        """|alpha|_1 + d - 1, the type of the radial reduction."""
        return self.l1 + self.d - 1

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return self.d

    def __getitem__(self, j):
        return self.entries[j]


def as_alpha(alpha) -> AlphaVector:
    if isinstance(alpha, AlphaVector):
        return alpha
    return AlphaVector(tuple(np.atleast_1d(np.asarray(alpha, dtype=float)).tolist()))


MultiIndex = tuple


def compositions(n: int, d: int) -> Iterator[tuple]:
    """Weak compositions of ``n`` into ``d`` parts, lexicographically ascending."""
    if d == 1:
        yield (n,)
        return
    # stars and bars; descending bar positions give ascending first part
    for bars in combinations(range(n + d - 1), d - 1):
        parts = []
        prev = -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(n + d - 2 - prev)
        yield tuple(parts)


def count_compositions(n: int, d: int) -> int:
    return math.comb(n + d - 1, d - 1)


def multi_indices(N: int, d: int) -> list:
    """All multi-indices with |mu|_1 <= N, grouped by degree, lexicographic within."""
    out = []
    for n in range(N + 1):
        out.extend(sorted(compositions(n, d)))
    return out


# ---------------------------------------------------------------------------
# argument checks
# ---------------------------------------------------------------------------


def _check_type(a):
    a = float(a)
    if not math.isfinite(a) or a <= -1.0:
        raise ValueError(f"Laguerre type must be > -1, got {a}")
    return a


def _check_degree(n):
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a non-negative integer, got {n}")
    return int(n)


def _check_points(x, allow_zero=True):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("arguments must be finite")
    if np.any(x < 0) or (not allow_zero and np.any(x == 0)):
        raise ValueError("arguments must be non-negative")
    return x


def _scalar_or_array(out, like):
    if np.ndim(like) == 0:
        return float(np.asarray(out).reshape(()))
    return out


# ---------------------------------------------------------------------------
# Laguerre polynomials and functions
# ---------------------------------------------------------------------------


def laguerre_poly(n, a, x):
    """Generalised Laguerre polynomial L_n^a(x).

    Plain three-term recurrence on the unnormalised polynomials.  Accurate
    to roughly 1e-12 relative to max(|L_n^a|) on [0, x] for n <= 64 and
    x <= 50; beyond that the loss near zeros grows like n * eps * envelope.
    Use :func:`laguerre_fn_1d` for large degree.
    """
    n = _check_degree(n)
    a = _check_type(a)
    xv = _check_points(x)
    prev = np.zeros_like(xv)
    cur = np.ones_like(xv)
    for k in range(n):
        cur, prev = ((2 * k + a + 1.0 - xv) * cur - (k + a) * prev) / (k + 1.0), cur
    return _scalar_or_array(cur, x)


def laguerre_fn_1d(n, a, x):
    """Orthonormal Laguerre function phi_n^a(x) in L^2((0, inf), x^(2a+1) dx).

    phi_n^a(x) = (2 n!/Gamma(n+a+1))^(1/2) L_n^a(x^2) exp(-x^2/2).  The value
    at ``x = 0`` is the continuous limit.
    """
    n = _check_degree(n)
    a = _check_type(a)
    xv = _check_points(x)
    return _scalar_or_array(_accel.phi_last(n, a, xv * xv), x)


def laguerre_fn_table(nmax, a, x):
    """phi_0^a .. phi_nmax^a at ``x``; shape ``(nmax+1,) + x.shape``."""
    nmax = _check_degree(nmax)
    a = _check_type(a)
    xv = _check_points(x)
    return _accel.phi_table(nmax, a, xv * xv)


def normalized_laguerre(n, a, x):
    """L^2((0, inf), dx)-orthonormal function (n!/Gamma(n+a+1))^(1/2) e^(-x/2) x^(a/2) L_n^a(x).

    At ``x = 0`` with ``a < 0`` the function is unbounded and ``+inf`` is
    returned (never NaN).
    """
    n = _check_degree(n)
    a = _check_type(a)
    xv = _check_points(x)
    phi = _accel.phi_last(n, a, xv)  # phi_n^a(sqrt(x)) since u = x
    with np.errstate(divide="ignore"):
        power = np.power(xv, 0.5 * a)
    out = phi * power / math.sqrt(2.0)
    if a < 0:
        out = np.where(xv == 0, np.inf, out)
    return _scalar_or_array(out, x)


def tilde_laguerre(n, a, x):
    """(Gamma(a+1) n! / Gamma(n+a+1))^(1/2) L_n^a(x); equals 1 identically for n = 0."""
    n = _check_degree(n)
    a = _check_type(a)
    xv = _check_points(x)
    if n <= 256:
        log_c = 0.5 * (math.lgamma(a + 1.0) + math.lgamma(n + 1.0) - math.lgamma(n + a + 1.0))
        return _scalar_or_array(math.exp(log_c) * laguerre_poly(n, a, xv), x)
    # phi_n^a(sqrt(x)) e^{x/2} / sqrt(2) = (n!/Gamma(n+a+1))^{1/2} L_n^a(x)
    phi = _accel.phi_last(n, a, xv)
    with np.errstate(over="ignore"):
        out = phi * np.exp(0.5 * xv) * math.exp(0.5 * math.lgamma(a + 1.0)) / math.sqrt(2.0)
    return _scalar_or_array(out, x)


def _points_d(x, d):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != d:
        raise ValueError(f"point dimension {x.shape[-1]} does not match alpha dimension {d}")
    return _check_points(x)


def laguerre_fn_d(mu, alpha, x):
    """Tensor Laguerre function prod_j phi_{mu_j}^{alpha_j}(x_j).

    ``x`` has trailing dimension d; leading dimensions broadcast.
    """
    alpha = as_alpha(alpha)
    mu = tuple(int(m) for m in mu)
    if len(mu) != alpha.d:
        raise ValueError("multi-index and alpha dimensions differ")
    xv = _points_d(x, alpha.d)
    out = np.ones(xv.shape[:-1])
    for j in range(alpha.d):
        out = out * _accel.phi_last(_check_degree(mu[j]), alpha[j], xv[..., j] ** 2)
    return float(out) if out.ndim == 0 else out


def eigenvalue(n, alpha) -> float:
    """e_n = 4n + 2|alpha|_1 + 2d."""
    alpha = as_alpha(alpha)
    return 4.0 * n + 2.0 * alpha.l1 + 2.0 * alpha.d


# ---------------------------------------------------------------------------
# modified Bessel function I_a
# ---------------------------------------------------------------------------


def _log_series_scaled(a, z):
    """log( I_a(z) / (z/2)^a ) by the positive power series, summed in scaled form."""
    q = 0.25 * z * z
    # the largest term sits near k* with k*(k*+a) = q
    kstar = max(0.0, 0.5 * (-(a + 1.0) + math.sqrt((a + 1.0) ** 2 + 4.0 * q)))
    kmax = int(kstar + 12.0 * math.sqrt(kstar + 1.0) + 40)
    log_t = -math.lgamma(a + 1.0)
    terms = [log_t]
    lq = math.log(q) if q > 0 else -math.inf
    for k in range(kmax):
        log_t += lq - math.log(k + 1.0) - math.log(k + a + 1.0)
        terms.append(log_t)
        if log_t < terms[0] - 60 and k > kstar:
            break
    terms = np.array(terms)
    top = terms.max()
    return top + math.log(np.exp(terms - top).sum())


def _log_hankel(a, z):
    """log I_a(z) from the large-argument expansion, truncated at its smallest term."""
    mu = 4.0 * a * a
    term = 1.0
    total = 1.0
    k = 1
    while k < 200:
        nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        k += 1
    return z - 0.5 * math.log(2.0 * math.pi * z) + math.log(total)


def _hankel_ok(a, z):
    return z > max(40.0, 2.0 * a * a)


def log_bessel_i_scaled(a, z) -> float:
    """log(I_a(z) / (z/2)^a); finite at z = 0 where it equals -log Gamma(a+1)."""
    a = _check_type(a)
    z = float(z)
    if not math.isfinite(z) or z < 0:
        raise ValueError(f"Bessel argument must be finite and >= 0, got {z}")
    if z == 0.0:
        return -math.lgamma(a + 1.0)
    if _hankel_ok(a, z):
        return _log_hankel(a, z) - a * math.log(0.5 * z)
    return _log_series_scaled(a, z)


def log_bessel_i(a, z) -> float:
    """log I_a(z); at z = 0 this is 0, -inf or +inf as a is 0, positive or negative."""
    a = _check_type(a)
    z = float(z)
    if not math.isfinite(z) or z < 0:
        raise ValueError(f"Bessel argument must be finite and >= 0, got {z}")
    if z == 0.0:
        # (z/2)^a / Gamma(a+1) at z = 0: 1, 0 or +inf by the sign of a
        return 0.0 if a == 0 else (-math.inf if a > 0 else math.inf)
    if _hankel_ok(a, z):
        return _log_hankel(a, z)
    return _log_series_scaled(a, z) + a * math.log(0.5 * z)


def bessel_i(a, z):
    """Modified Bessel function of the first kind I_a(z), a > -1, z >= 0.

    Power series (summed in log-scaled form, all terms positive) for
    moderate ``z``; Hankel expansion once ``z > max(40, 2a^2)``.
    Overflows to ``inf`` only when I_a(z) itself exceeds the double range.
    """
    if np.ndim(z) == 0:
        lv = log_bessel_i(a, z)
        return math.exp(lv) if lv < 709.7 else math.inf
    zv = np.asarray(z, dtype=np.float64)
    return np.vectorize(lambda t: bessel_i(a, t), otypes=[float])(zv)


# ---------------------------------------------------------------------------
# four-regime envelope and oscillatory main term
# ---------------------------------------------------------------------------

REGIMES = ("small", "oscillatory_bulk", "turning_point", "exponential_tail")


@dataclass(frozen=True)
class AsymptoticRegime:
    regime_tag: str
    nu: float

    @property
    def boundary_points(self) -> tuple:
        return (1.0 / self.nu, self.nu / 2.0, 1.5 * self.nu)


def _regime_index(nu, u):
    if u <= 1.0 / nu:
        return 0
    if u <= nu / 2.0:
        return 1
    if u <= 1.5 * nu:
        return 2
    return 3


def _envelope_value(idx, a, nu, u, gamma):
    if idx == 0:
        if u == 0.0:
            return 0.0 if a > 0 else (1.0 if a == 0 else math.inf)
        return (u * nu) ** (0.5 * a)
    if idx == 1:
        return (u * nu) ** -0.25
    if idx == 2:
        return nu ** -0.25 * (nu ** (1.0 / 3.0) + abs(nu - u)) ** -0.25
    return math.exp(-gamma * u)


def asymptotic_envelope(n, a, u, gamma: float | None = None):
    """Classify ``u`` into the four-regime partition and return (regime, envelope).

    ``u`` is the argument of the normalised function, i.e. x^2 for phi.
    The partition is [0,1/nu], [1/nu,nu/2], [nu/2,3nu/2], [3nu/2,inf) with
    nu = 4n + 2a + 2; shared endpoints belong to the lower regime.
    """
    n = _check_degree(n)
    a = _check_type(a)
    u = float(u)
    if not math.isfinite(u) or u < 0:
        raise ValueError("u must be finite and >= 0")
    gamma = ENVELOPE_GAMMA if gamma is None else gamma
    nu = 4.0 * n + 2.0 * a + 2.0
    idx = _regime_index(nu, u)
    return AsymptoticRegime(REGIMES[idx], nu), _envelope_value(idx, a, nu, u, gamma)


def envelope_array(n, a, u, gamma: float | None = None):
    """Vectorised envelope values (regime tags dropped)."""
    gamma = ENVELOPE_GAMMA if gamma is None else gamma
    u = np.asarray(u, dtype=np.float64)
    nu = 4.0 * n + 2.0 * a + 2.0
    out = np.empty_like(u)
    with np.errstate(divide="ignore"):
        small = u <= 1.0 / nu
        bulk = (~small) & (u <= nu / 2.0)
        turn = (~small) & (~bulk) & (u <= 1.5 * nu)
        tail = u > 1.5 * nu
        out[small] = np.power(u[small] * nu, 0.5 * a)
        out[bulk] = (u[bulk] * nu) ** -0.25
        out[turn] = nu ** -0.25 * (nu ** (1.0 / 3.0) + np.abs(nu - u[turn])) ** -0.25
        out[tail] = np.exp(-gamma * u[tail])
    return out


def envelope_constant(a, n_list: Sequence[int], points_per_n: int = 4000, gamma: float | None = None):
    """Smallest C with |normalized_laguerre| <= C * envelope on a fixed grid.

    Returns ``(C_max, C_logls)``: the dominating constant (max ratio) and the
    least-squares fit of log|L| - log(envelope) restricted to the ridge (the
    top decile of ratios per n), reported for comparison.
    """
    c_max = 0.0
    ridge = []
    for n in n_list:
        nu = 4.0 * n + 2.0 * a + 2.0
        u = np.concatenate(
            [
                np.geomspace(1e-3 / nu, 1.0 / nu, 64),
                np.linspace(1.0 / nu, 3.0 * nu, points_per_n)[1:],
            ]
        )
        val = np.abs(normalized_laguerre(n, a, u))
        env = envelope_array(n, a, u, gamma)
        ok = env > 0
        ratio = val[ok] / env[ok]
        c_max = max(c_max, float(ratio.max()))
        top = np.sort(ratio)[-max(1, len(ratio) // 10):]
        ridge.append(np.log(top[top > 0]))
    logs = np.concatenate(ridge)
    return c_max, float(math.exp(logs.mean()))


def oscillatory_main_term(n, a, u):
    """Leading oscillatory approximation of the normalised Laguerre function.

    Valid for 1 <= u <= nu - nu^(1/3), nu = 4n + 2a + 2:
    (2/pi)^(1/2) (-1)^n u^(-1/4) (nu-u)^(-1/4) cos((nu (2 theta - sin 2 theta) - pi)/4)
    with theta = arccos(sqrt(u/nu)).
    """
    n = _check_degree(n)
    a = _check_type(a)
    uv = np.asarray(u, dtype=np.float64)
    nu = 4.0 * n + 2.0 * a + 2.0
    if np.any(uv < 1.0) or np.any(uv > nu - nu ** (1.0 / 3.0)):
        raise ValueError(f"u outside the validity window [1, nu - nu^(1/3)] with nu = {nu}")
    theta = np.arccos(np.sqrt(uv / nu))
    sign = -1.0 if n % 2 else 1.0
    out = (
        math.sqrt(2.0 / math.pi)
        * sign
        * uv ** -0.25
        * (nu - uv) ** -0.25
        * np.cos((nu * (2.0 * theta - np.sin(2.0 * theta)) - math.pi) / 4.0)
    )
    return _scalar_or_array(out, u)


def oscillatory_remainder_bound(n, a, u):
    """nu^(1/4) (nu-u)^(-7/4) + (u nu)^(-3/4): the size of the remainder."""
    uv = np.asarray(u, dtype=np.float64)
    nu = 4.0 * n + 2.0 * a + 2.0
    out = nu ** 0.25 * (nu - uv) ** -1.75 + (uv * nu) ** -0.75
    return _scalar_or_array(out, u)


def oscillation_phase_angle(n, a, u) -> float:
    """theta = arccos(sqrt(u / nu))."""
    nu = 4.0 * n + 2.0 * a + 2.0
    return math.acos(math.sqrt(u / nu))


SPECIAL_FUNCTIONS = {
    "laguerre_poly": laguerre_poly,
    "laguerre_fn_1d": laguerre_fn_1d,
    "normalized_laguerre": normalized_laguerre,
    "tilde_laguerre": tilde_laguerre,
    "bessel_i": bessel_i,
    "log_bessel_i": log_bessel_i,
    "eigenvalue": lambda n, *alpha: eigenvalue(int(n), alpha),
    "oscillatory_main_term": oscillatory_main_term,
}
