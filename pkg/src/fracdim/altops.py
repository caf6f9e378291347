"""Competing scalar Laplacians and first-order operators.

Every operator here acts axis by axis as

    sum_k  A_k f_kk + B_k f_k + C_k f

so each kind is described by its three coefficient functions.  ``news``
is the div-grad Laplacian of :mod:`fracdim.diffops`; ``ps`` is the
Palmer-Stavrinou operator; ``k1``, ``k2`` and ``kl`` are the weighted
Laplacians built from the measure weight ``v``; ``zmn`` is the square of
the approximate first-order operator ``d_k + (alpha_k - 1)/(2 x_k)``.

The weighted ("definitional") forms are also available, evaluated by
nested finite differences of ``v`` itself, so the expanded coefficients can
be checked against them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diffops import DEFAULT_FD, FiniteDifference, as_real, as_scalar_field, derivative
from .errors import DomainError, ValidationError
from .measure import MultiIndex, nids_prefactor
from .special import gamma

PS = "ps"
K1 = "k1"
K2 = "k2"
KL = "kl"
NEWS = "news"
ZMN = "zmn"
KINDS = (PS, K1, K2, KL, NEWS, ZMN)

FRACTIONAL_WEIGHT = "fractional"
NIDS_WEIGHT = "nids"


@dataclass(frozen=True)
class LaplacianSpec:
    """Which Laplacian, on which multi-index.

    The K-family uses the isotropic fractional-space weight
    ``prod x_k**(alpha-1) / Gamma(alpha)`` and therefore needs equal axis
    dimensions, unless ``weight="nids"`` selects the anisotropic
    non-integer-dimensional weight.  Constant prefactors of the weight cancel,
    so both choices give the same operator.
    """

    kind: str
    alphas: MultiIndex
    l: float | None = None
    weight: str | None = None
    fd: FiniteDifference = field(default=DEFAULT_FD, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown Laplacian kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.alphas, MultiIndex):
            object.__setattr__(self, "alphas", MultiIndex(tuple(self.alphas), relaxed=True))
        if self.kind == KL and self.l is None:
            raise ValidationError("kind 'kl' needs the parameter l")
        w = self.weight
        if w is None:
            w = FRACTIONAL_WEIGHT if self.alphas.is_isotropic else NIDS_WEIGHT
            object.__setattr__(self, "weight", w)
        if w not in (FRACTIONAL_WEIGHT, NIDS_WEIGHT):
            raise ValidationError(f"unknown weight {w!r}")
        if self.kind in (K1, K2, KL) and w == FRACTIONAL_WEIGHT and not self.alphas.is_isotropic:
            raise ValidationError("the fractional-space weight is isotropic; use weight='nids'")

    @classmethod
    def isotropic(cls, kind, alpha, **kw):
        return cls(kind, MultiIndex.isotropic(alpha, relaxed=True), **kw)


def coefficients(spec, k, x):
    """``(A, B, C)`` of axis ``k`` at coordinate ``x`` (``x > 0``)."""
    a = spec.alphas[k]
    x = as_real(x)
    if spec.kind == NEWS:
        c2 = (nids_prefactor(a) * x ** (a - 1.0)) ** 2
        return 1.0 / c2, -(a - 1.0) / x / c2, 0.0 * x
    B = (a - 1.0) / x
    if spec.kind in (PS, K1):
        C = 0.0 * x
    elif spec.kind in (K2, ZMN):
        C = (a - 1.0) * (a - 3.0) / (4.0 * x * x)
    else:
        C = ((a - 2.0) ** 2 - 4.0 * spec.l**2) / (4.0 * x * x)
    return 1.0 + 0.0 * x, B, C


def _positive(at):
    at = [as_real(v) for v in at]
    for k, v in enumerate(at):
        if np.any(v <= 0.0):
            raise DomainError(f"alternative Laplacians are defined for x_{k + 1} > 0")
    return at


def _axis(f, k, at, fd, order):
    def g(t):
        p = list(at)
        p[k] = t
        return f(*p)

    return derivative(g, at[k], order, fd, singular_at_zero=True)


def apply_laplacian(spec, f, at):
    """Expanded form of the selected Laplacian at ``at = (x1, x2, x3)``."""
    f = as_scalar_field(f)
    at = _positive(at)
    value = 0.0
    f0 = f(*at)
    for k in range(3):
        A, B, C = coefficients(spec, k, at[k])
        value = value + A * _axis(f, k, at, spec.fd, 2) + B * _axis(f, k, at, spec.fd, 1) + C * f0
    return value


def laplacian_field(spec, f):
    return as_scalar_field(lambda x1, x2, x3: apply_laplacian(spec, f, (x1, x2, x3)))


def first_order(kind, k, alphas, f, at, fd=DEFAULT_FD):
    """``df/dx_k + (alpha_k - 1)/(2 x_k) f``.

    ``kind`` is ``"calcagni"`` (square root of the weighted Laplacian) or
    ``"zmn"`` (the approximate operator); both expand to the same formula.
    """
    if kind not in ("calcagni", "zmn"):
        raise ValidationError(f"unknown first-order kind {kind!r}")
    if not isinstance(alphas, MultiIndex):
        alphas = MultiIndex(tuple(alphas), relaxed=True)
    f = as_scalar_field(f)
    at = _positive(at)
    a = alphas[k]
    return _axis(f, k, at, fd, 1) + (a - 1.0) / (2.0 * at[k]) * f(*at)


def first_order_field(kind, k, alphas, f, fd=DEFAULT_FD):
    return as_scalar_field(lambda x1, x2, x3: first_order(kind, k, alphas, f, (x1, x2, x3), fd))


def square_of_first_order(alphas, f, at, kind="calcagni", fd=DEFAULT_FD):
    """``sum_k D_k(D_k f)`` by composing the first-order operator with itself."""
    total = 0.0
    for k in range(3):
        inner = first_order_field(kind, k, alphas, f, fd)
        total = total + first_order(kind, k, alphas, inner, at, fd)
    return total


# -- weighted (definitional) forms -----------------------------------------


def measure_weight(spec, x1, x2, x3):
    """Product weight ``v(x)`` for the fractional-space or the non-integer-dimensional measure."""
    v = 1.0
    for a, x in zip(spec.alphas, (x1, x2, x3)):
        x = np.abs(as_real(x))
        if spec.weight == FRACTIONAL_WEIGHT:
            v = v * x ** (a - 1.0) / gamma(a)
        else:
            v = v * math.pi ** (0.5 * a) / gamma(0.5 * a + 1.0) * x ** (a - 1.0)
    return v


def apply_laplacian_definitional(spec, f, at, literal=False):
    """Weighted form of ``k1``, ``k2`` or ``kl`` by nested differentiation of ``v``.

    ``kl`` uses ``x**s / sqrt(v) d(x**(-2s) d(x**s sqrt(v) f))`` with
    ``s = l - 1/2``, which reduces to ``k1`` at ``l = 1 - alpha/2`` and to
    ``k2`` at ``l = 1/2``.  ``literal=True`` instead uses ``x**s`` for the
    middle factor as well; that variant does not match the expanded form
    unless ``l = 1/2``.
    """
    if spec.kind not in (K1, K2, KL):
        raise ValidationError("definitional forms exist only for k1, k2 and kl")
    f = as_scalar_field(f)
    at = _positive(at)
    fd = spec.fd

    def v(*p):
        return measure_weight(spec, *p)

    def sqv(*p):
        return np.sqrt(measure_weight(spec, *p))

    total = 0.0
    for k in range(3):
        if spec.kind == K1:
            def flux(*p, k=k):
                return v(*p) * _axis(f, k, [as_real(t) for t in p], fd, 1)

            total = total + _axis(flux, k, at, fd, 1) / v(*at)
        elif spec.kind == K2:
            def g(*p):
                return sqv(*p) * f(*p)

            total = total + _axis(g, k, at, fd, 2) / sqv(*at)
        else:
            s = spec.l - 0.5
            mid = s if literal else -2.0 * s

            def g(*p, k=k):
                return np.asarray(p[k]) ** s * sqv(*p) * f(*p)

            def flux(*p, k=k):
                pp = [as_real(t) for t in p]
                return pp[k] ** mid * _axis(g, k, pp, fd, 1)

            total = total + at[k] ** s / sqv(*at) * _axis(flux, k, at, fd, 1)
    return total


# -- comparisons --------------------------------------------------------------


@dataclass
class DiscrepancyReport:
    max_abs: float
    mean_abs: float
    analytic_max_abs: float | None
    analytic_mismatch: float | None
    values: np.ndarray

    def as_dict(self):
        return {
            "max_abs": self.max_abs,
            "mean_abs": self.mean_abs,
            "analytic_max_abs": self.analytic_max_abs,
            "analytic_mismatch": self.analytic_mismatch,
        }


def analytic_difference(a, b, f, at):
    """``(a - b) f`` from the coefficient differences, with shared derivatives."""
    f = as_scalar_field(f)
    at = _positive(at)
    f0 = f(*at)
    out = 0.0
    for k in range(3):
        Aa, Ba, Ca = coefficients(a, k, at[k])
        Ab, Bb, Cb = coefficients(b, k, at[k])
        out = out + (Aa - Ab) * _axis(f, k, at, a.fd, 2) + (Ba - Bb) * _axis(f, k, at, a.fd, 1) + (Ca - Cb) * f0
    return out


def operator_discrepancy(a, b, f, points):
    """Compare two Laplacians over ``points`` (shape ``(3, n)``)."""
    points = np.asarray(points, dtype=float)
    pa = apply_laplacian(a, f, tuple(points))
    pb = apply_laplacian(b, f, tuple(points))
    diff = np.atleast_1d(pa - pb)
    an = np.atleast_1d(analytic_difference(a, b, f, tuple(points)))
    return DiscrepancyReport(
        max_abs=float(np.max(np.abs(diff))),
        mean_abs=float(np.mean(np.abs(diff))),
        analytic_max_abs=float(np.max(np.abs(an))),
        analytic_mismatch=float(np.max(np.abs(diff - an))),
        values=diff,
    )


# step control used by the identity suite: long-double stencils keep nested
# second derivatives clear of cancellation down to about 1e-12
IDENTITY_FD = FiniteDifference(step=3e-3, richardson=1, extended=True)
