"""Gamma function used by every closed form in the package.

Lanczos approximation with g = 7 and nine coefficients, plus the reflection
formula below 1/2.  Relative accuracy is better than 1e-14 on (0, 30);
all measure normalisations route through :func:`gamma` so that identities
between them cancel with the same rounding.
"""
import math

import numpy as np

_G = 7.0
_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _gamma_scalar(x):
    if x < 0.5:
        if x == math.floor(x):
            raise ValueError(f"gamma has a pole at {x}")
        return math.pi / (math.sin(math.pi * x) * _gamma_scalar(1.0 - x))
    x -= 1.0
    acc = _COEF[0]
    for i in range(1, len(_COEF)):
        acc += _COEF[i] / (x + i)
    t = x + _G + 0.5
    # split the power so t**(x+0.5) does not overflow before exp(-t) shrinks it
    half = t ** (0.5 * (x + 0.5))
    return _SQRT_2PI * half * math.exp(-t) * half * acc


def gamma(x):
    """Gamma function for a float or an array of floats."""
    if np.ndim(x) == 0:
        return _gamma_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    return np.vectorize(_gamma_scalar, otypes=[float])(arr)


def beta_half(mu, nu):
    """``Gamma(mu/2) Gamma(nu/2) / Gamma((mu+nu)/2)``, the half-angle beta function."""
    return gamma(0.5 * mu) * gamma(0.5 * nu) / gamma(0.5 * (mu + nu))
