"""Test families used by the sharpness and lower-bound experiments.

f_n(r) = sign(phi_n^A(r)) |phi_n^A(r)|^(1/(p-1)) with A = |alpha|_1 + d - 1,
g_n(x) = phi_n^{a_1}(x_1) phi_0^{a_2}(x_2) ... phi_0^{a_d}(x_d),
G_n(x) = g_n(x) (1 + |x|)^(-beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _accel
from ..special_fn import AlphaVector, as_alpha

KINDS = ("f_n", "g_n", "G_n")


@dataclass(frozen=True)
class SharpnessFamily:
    kind: str
    n: int
    p: float = 2.0
    beta: float = 0.0
    alpha: AlphaVector = AlphaVector((0.0,))

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_alpha(self.alpha))
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if int(self.n) != self.n or self.n < 0:
            raise ValueError("n must be a non-negative integer")
        if self.kind == "f_n" and not self.p > 1:
            raise ValueError("f_n needs p > 1")
        if self.kind == "G_n" and not self.beta >= 0:
            raise ValueError("G_n needs beta >= 0")

    @property
    def reduced_type(self) -> float:
        return self.alpha.l1 + self.alpha.d - 1.0

    def profile(self, r):
        """Radial profile of f_n as a function of r = |x|."""
        if self.kind != "f_n":
            raise ValueError("only f_n is radial")
        ph = _accel.phi_last(self.n, self.reduced_type, np.asarray(r, dtype=float) ** 2)
        return np.sign(ph) * np.abs(ph) ** (1.0 / (self.p - 1.0))

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[-1] != self.alpha.d:
            raise ValueError("point dimension differs from alpha")
        if self.kind == "f_n":
            return self.profile(np.sqrt(np.sum(pts * pts, axis=-1)))
        out = _accel.phi_last(self.n, self.alpha[0], pts[:, 0] ** 2)
        for j in range(1, self.alpha.d):
            out = out * _accel.phi_last(0, self.alpha[j], pts[:, j] ** 2)
        if self.kind == "G_n":
            out = out * (1.0 + np.sqrt(np.sum(pts * pts, axis=-1))) ** (-self.beta)
        return out


def unit_omega(r):
    return np.ones_like(np.asarray(r, dtype=float))


# ---------------------------------------------------------------------------
# weak L^2 norm on a radial annulus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakNorm:
    value: float
    argmax_delta: float
    rungs: int
    exact: float  # sup over all delta of the sampled distribution


def annulus_samples(n: int, a: float, lo: float = 0.5, hi: float = 1.0, per_wave: int = 64, omega=unit_omega):
    """Midpoint samples of |phi_n^a| on [lo, hi] with weights omega(r) r^(2a+1) dr."""
    nu = 4.0 * n + 2.0 * a + 2.0
    waves = (hi - lo) * math.sqrt(nu) / math.pi
    m = max(4096, int(math.ceil(waves * per_wave)))
    r = lo + (hi - lo) * (np.arange(m) + 0.5) / m
    w = (hi - lo) / m * r ** (2 * a + 1) * np.asarray(omega(r), dtype=float)
    if np.any(w <= 0):
        raise ValueError("omega must be positive on the annulus")
    return np.abs(_accel.phi_last(n, a, r * r)), w


def weak_norm(values, weights, rungs: int = 32, lo_frac: float = 1.0 / 64.0, scale: float = 1.0) -> WeakNorm:
    """sup_delta delta * (scale * mass{|v| > delta})^(1/2) over a geometric ladder.

    The ladder spans [lo_frac, 1] * max|v|.  ``exact`` is the sup over every
    delta for the sampled distribution, attained just below a sample value.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    order = np.argsort(-v, kind="stable")
    vs, cw = v[order], np.cumsum(w[order])
    top = float(vs[0])
    ladder = top * np.geomspace(lo_frac, 1.0, rungs)
    # mass of {v > delta}: samples strictly above delta
    k = np.searchsorted(-vs, -ladder, side="left")
    mass = np.where(k > 0, cw[np.maximum(k - 1, 0)], 0.0)
    vals = ladder * np.sqrt(scale * mass)
    i = int(np.argmax(vals))
    exact = float(np.max(vs * np.sqrt(scale * cw)))
    return WeakNorm(float(vals[i]), float(ladder[i]), rungs, exact)


def refined_weak_norm(values, weights, rungs: int = 32, tol: float = 0.05, max_rungs: int = 1024, scale: float = 1.0):
    """Double the ladder density until the estimate moves by less than ``tol``.

    Returns (estimate, refined estimate).  The refined ladder contains the
    coarse one, so the estimate is nondecreasing.
    """
    coarse = weak_norm(values, weights, rungs, scale=scale)
    while True:
        fine = weak_norm(values, weights, 2 * coarse.rungs - 1, scale=scale)
        if abs(fine.value / coarse.value - 1.0) <= tol or fine.rungs >= max_rungs:
            return coarse, fine
        coarse = fine

