"""One-dimensional radial integration for the reduced Laguerre functions.

A radial function on (0, inf)^d integrates against d mu_alpha as
c_{alpha,d} int_0^inf g(r) r^(2A-1) dr with A = |alpha|_1 + d and
c_{alpha,d} = prod Gamma(alpha_i+1) / (2^(d-1) Gamma(A)).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .. import _accel
from ..special_fn import AlphaVector, as_alpha


def sphere_constant(alpha) -> float:
    alpha = as_alpha(alpha)
    A = alpha.l1 + alpha.d
    return math.exp(sum(math.lgamma(a + 1.0) for a in alpha) - (alpha.d - 1) * math.log(2.0) - math.lgamma(A))


@lru_cache(maxsize=64)
def _gauss(m: int, power: float):
    if power == 0.0:
        return roots_legendre(m)
    return roots_jacobi(m, 0.0, power)


def panel_rule(lo: float, hi: float, a: float, panels: int, m: int = 16):
    """Nodes and weights for int_lo^hi g(x) x^(2a+1) dx on equal panels.

    Interior panels use Gauss-Legendre with the weight folded in; a panel
    starting at 0 uses Gauss-Jacobi so the endpoint power is exact.
    """
    edges = np.linspace(lo, hi, panels + 1)
    t, w = _gauss(m, 0.0)
    h = edges[1] - edges[0]
    mids = 0.5 * (edges[:-1] + edges[1:])
    x = (mids[:, None] + 0.5 * h * t[None, :]).reshape(-1)
    wt = (0.5 * h * w[None, :] * np.ones((panels, 1))).reshape(-1) * x ** (2 * a + 1)
    if lo == 0.0:
        tj, wj = _gauss(m, 2 * a + 1)
        x0 = 0.5 * h * (1.0 + tj)
        w0 = wj * (0.5 * h) ** (2 * a + 2)
        x = np.concatenate([x0, x[m:]])
        wt = np.concatenate([w0, wt[m:]])
    return x, wt


def nu(n: int, a: float) -> float:
    return 4.0 * n + 2.0 * a + 2.0


def full_line_rule(n: int, a: float, per_half_wave: int = 2, m: int = 16):
    """Rule on [0, sqrt(2 nu) + 6] resolving the oscillations of phi_n^a."""
    v = nu(n, a)
    hi = math.sqrt(2.0 * v) + 6.0
    panels = max(64, int(math.ceil(hi * math.sqrt(v) / math.pi * per_half_wave)))
    return panel_rule(0.0, hi, a, panels, m)


def phi(n: int, a: float, x) -> np.ndarray:
    return _accel.phi_last(n, a, np.asarray(x, dtype=float) ** 2)
