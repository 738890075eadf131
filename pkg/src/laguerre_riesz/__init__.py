"""Convolution-type Laguerre expansions and Bochner-Riesz summability numerics."""

from ._accel import BACKEND
from .special_fn import (
    AlphaVector,
    as_alpha,
    bessel_i,
    eigenvalue,
    laguerre_fn_1d,
    laguerre_fn_d,
    laguerre_poly,
    normalized_laguerre,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AlphaVector",
    "as_alpha",
    "bessel_i",
    "eigenvalue",
    "laguerre_fn_1d",
    "laguerre_fn_d",
    "laguerre_poly",
    "normalized_laguerre",
]
