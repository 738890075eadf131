"""Log-log slope fitting with a seeded pairs bootstrap."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_POINTS = 6
MIN_DECADES = 1.2
N_BOOT = 200


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    n_points: int
    decades: float

    @property
    def conclusive(self) -> bool:
        return self.n_points >= MIN_POINTS and self.decades >= MIN_DECADES


def _ols(lx, ly):
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(coef[0]), float(coef[1])


def fit_loglog(x, y, seed: int = 0, n_boot: int = N_BOOT) -> SlopeFit:
    """OLS slope of log y on log x; stderr from ``n_boot`` resampled pairs.

    Non-positive values are rejected: every fitted quantity here is a norm
    or a measure.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need at least two (x, y) pairs of equal length")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = _ols(lx, ly)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, len(x), len(x))
        if np.ptp(lx[idx]) == 0:
            continue  # degenerate resample, slope undefined
        boots.append(_ols(lx[idx], ly[idx])[0])
    stderr = float(np.std(boots, ddof=1)) if len(boots) > 1 else math.nan
    decades = float(math.log10(x.max() / x.min()))
    return SlopeFit(slope, icpt, stderr, len(x), decades)
