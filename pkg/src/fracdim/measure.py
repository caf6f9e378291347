"""Dimensions, density-of-states weights and effective coordinates.

A medium is described by one real dimension per Cartesian axis.  Along an
axis of dimension ``alpha`` the line measure is ``c1(alpha, x) dx`` with the
density of states

    c1(alpha, x) = pi**(alpha/2) / Gamma(alpha/2) * |x|**(alpha - 1)

and its antiderivative, the effective coordinate ``X(x)``, turns the whole
calculus into ordinary calculus in ``X``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidDimension, NegativeRadius
from .special import gamma

NIDS = "nids"
RIEMANN_LIOUVILLE = "rl"
MODIFIED_RL = "mrl"
FAMILIES = (NIDS, RIEMANN_LIOUVILLE, MODIFIED_RL)


def check_alpha(alpha, name="alpha"):
    """Return ``alpha`` as a float, rejecting non-positive or non-finite values."""
    try:
        a = float(alpha)
    except (TypeError, ValueError):
        raise InvalidDimension(f"{name} must be a real number, got {alpha!r}") from None
    if not math.isfinite(a) or a <= 0.0:
        raise InvalidDimension(f"{name} must be finite and > 0, got {alpha!r}")
    return a


@dataclass(frozen=True)
class MultiIndex:
    """Per-axis dimensions ``(alpha_1, alpha_2, alpha_3)``.

    The total dimension ``D`` is always recomputed from the components.  By
    default ``D <= 3`` is enforced; ``relaxed=True`` admits fractal-curve
    media whose axis dimensions push ``D`` past three.
    """

    alphas: tuple
    relaxed: bool = False

    def __post_init__(self):
        vals = tuple(self.alphas)
        if len(vals) != 3:
            raise InvalidDimension(f"need three axis dimensions, got {len(vals)}")
        vals = tuple(check_alpha(a, f"alpha_{k + 1}") for k, a in enumerate(vals))
        object.__setattr__(self, "alphas", vals)
        if not self.relaxed and sum(vals) > 3.0 + 1e-12:
            raise InvalidDimension(
                f"total dimension D={sum(vals):.6g} exceeds 3; pass relaxed=True to allow it"
            )

    @classmethod
    def isotropic(cls, alpha, relaxed=False):
        return cls((alpha, alpha, alpha), relaxed=relaxed)

    @property
    def D(self):
        return self.alphas[0] + self.alphas[1] + self.alphas[2]

    @property
    def is_isotropic(self):
        return self.alphas[0] == self.alphas[1] == self.alphas[2]

    def __iter__(self):
        return iter(self.alphas)

    def __getitem__(self, k):
        return self.alphas[k]


@dataclass(frozen=True)
class CrossSectionDims:
    """Box-counting dimensions of the YZ, XZ and XY cross-sections."""

    d_yz: float
    d_xz: float
    d_xy: float

    def __post_init__(self):
        for name in ("d_yz", "d_xz", "d_xy"):
            v = float(getattr(self, name))
            if not 0.0 < v < 2.0:
                raise InvalidDimension(f"{name} must lie in (0, 2), got {v}")
            object.__setattr__(self, name, v)

    def multi_index(self, D, relaxed=False):
        return MultiIndex(
            tuple(axis_dimension_from_cross_section(D, d) for d in (self.d_yz, self.d_xz, self.d_xy)),
            relaxed=relaxed,
        )


@dataclass(frozen=True)
class WeightSpec:
    """Density-of-states family along one axis.

    ``anchor`` is the left end ``a`` of the interval for the Riemann-Liouville
    family and the right end ``b`` for the modified Riemann-Liouville family;
    it is ignored by the non-integer-dimensional family.
    """

    alpha: float
    family: str = NIDS
    anchor: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        if self.family not in FAMILIES:
            raise ValueError(f"unknown weight family {self.family!r}; expected one of {FAMILIES}")


def nids_prefactor(alpha):
    """``pi**(alpha/2) / Gamma(alpha/2)``; equals 1 at ``alpha = 1``."""
    alpha = check_alpha(alpha)
    return math.pi ** (0.5 * alpha) / gamma(0.5 * alpha)


def _power_weight(prefactor, alpha, r):
    r = np.abs(np.asarray(r, dtype=float))
    if alpha == 1.0:
        return np.full_like(r, prefactor) if r.ndim else prefactor
    zero = r == 0.0
    if np.any(zero):
        if alpha < 1.0:
            raise DomainError(f"weight diverges at the anchor for alpha={alpha} < 1")
        # alpha > 1: the limit is zero
    out = prefactor * r ** (alpha - 1.0)
    return out if out.ndim else float(out)


def weight(spec, x):
    """Density of states ``c1(alpha, x)`` of the selected family."""
    a = spec.alpha
    if spec.family == NIDS:
        return _power_weight(nids_prefactor(a), a, x)
    if spec.family == RIEMANN_LIOUVILLE:
        return _power_weight(1.0 / gamma(a), a, np.asarray(x, dtype=float) - spec.anchor)
    return _power_weight(a, a, spec.anchor - np.asarray(x, dtype=float))


def nids_weight(alpha, x):
    return weight(WeightSpec(alpha), x)


@dataclass(frozen=True)
class EffectiveCoordinateMap:
    """Map ``x -> X`` (non-integer-dimensional) or ``x -> Q`` (fractional space)."""

    alpha: float
    variant: str = "X"

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        if self.variant not in ("X", "Q"):
            raise ValueError(f"variant must be 'X' or 'Q', got {self.variant!r}")

    @property
    def scale(self):
        a = self.alpha
        if self.variant == "X":
            return math.pi ** (0.5 * a) / (2.0 * gamma(0.5 * a + 1.0))
        return 1.0 / gamma(a + 1.0)

    def __call__(self, x):
        return effective_coordinate(self, x)

    def inverse(self, X):
        return inverse_effective_coordinate(self, X)


def effective_coordinate(emap, x):
    """Odd, increasing antiderivative of the weight: ``scale * sgn(x) |x|**alpha``."""
    x = np.asarray(x, dtype=float)
    out = emap.scale * np.sign(x) * np.abs(x) ** emap.alpha
    return out if out.ndim else float(out)


def inverse_effective_coordinate(emap, X):
    X = np.asarray(X, dtype=float)
    out = np.sign(X) * (np.abs(X) / emap.scale) ** (1.0 / emap.alpha)
    return out if out.ndim else float(out)


def effective_x(alpha, x):
    """Shorthand for the non-integer-dimensional effective coordinate ``X(alpha, x)``."""
    return effective_coordinate(EffectiveCoordinateMap(alpha), x)


def inverse_effective_x(alpha, X):
    return inverse_effective_coordinate(EffectiveCoordinateMap(alpha), X)


def _check_radius(r, name):
    r = float(r)
    if not r >= 0.0:
        raise NegativeRadius(f"{name} must be >= 0, got {r}")
    return r


def ball_volume(alpha, R):
    """Volume of the ``alpha``-dimensional ball of radius ``R``."""
    alpha = check_alpha(alpha)
    R = _check_radius(R, "R")
    return math.pi ** (0.5 * alpha) / gamma(0.5 * alpha + 1.0) * R**alpha


def sphere_area(alpha, r):
    """Area ``S_{alpha-1}(r)`` of the sphere bounding the ``alpha``-ball.

    This is the only place the factor-2 normalisation appears; it equals
    twice the density of states at ``|x| = r``.
    """
    alpha = check_alpha(alpha)
    r = _check_radius(r, "r")
    if r == 0.0 and alpha < 1.0:
        raise DomainError("sphere area diverges at r=0 for alpha < 1")
    return 2.0 * nids_prefactor(alpha) * r ** (alpha - 1.0)


def axis_dimension_from_cross_section(D, d_perp):
    """Axis dimension ``alpha = D - d_perp`` from the mass dimension and cross-section.

    ``d_perp = 2`` (a solid cross-section) is accepted so the non-fractal
    case reduces to ``alpha = D - 2``.
    """
    D = float(D)
    d_perp = float(d_perp)
    if not 0.0 < d_perp <= 2.0:
        raise InvalidDimension(f"cross-section dimension must lie in (0, 2], got {d_perp}")
    return check_alpha(D - d_perp, "D - d_perp")


def axis_mass(alpha, L):
    """Measure of ``[0, L]`` along one axis: ``pi**(a/2) / (a Gamma(a/2)) * L**a``."""
    alpha = check_alpha(alpha)
    if not L > 0:
        raise InvalidDimension(f"edge length must be > 0, got {L}")
    return nids_prefactor(alpha) / alpha * float(L) ** alpha


def parallelepiped_mass(alphas, L, rho0=1.0):
    """Mass of the box ``[0, L1] x [0, L2] x [0, L3]`` with uniform density ``rho0``."""
    if not isinstance(alphas, MultiIndex):
        alphas = MultiIndex(tuple(alphas))
    if not rho0 > 0:
        raise InvalidDimension(f"rho0 must be > 0, got {rho0}")
    L = tuple(float(v) for v in L)
    if len(L) != 3:
        raise InvalidDimension("need three edge lengths")
    m = float(rho0)
    for a, length in zip(alphas, L):
        m *= axis_mass(a, length)
    return m


def ball_mass_law(M0, R, R0, D):
    """Power law ``M0 (R/R0)**D`` for the mass of a ball region."""
    return M0 * (R / R0) ** check_alpha(D, "D")


def box_mass_law(M0, L, R0, alphas):
    """Anisotropic power law ``M0 prod (L_k/R0)**alpha_k``."""
    m = M0
    for a, length in zip(alphas, L):
        m *= (length / R0) ** check_alpha(a)
    return m
