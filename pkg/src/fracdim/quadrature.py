"""Integration against non-integer-dimensional product measures.

The default rule removes the ``|x|**(alpha-1)`` weight analytically: with
``u = X(x)`` the weighted integral becomes an ordinary integral in ``u``,
which is done by composite Gauss-Legendre.  Panels next to the origin are
graded geometrically because ``x(u)`` has a fractional power there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, roots_jacobi

from .errors import InvalidDimension, ToleranceNotMet, ValidationError
from .measure import (
    MODIFIED_RL,
    NIDS,
    RIEMANN_LIOUVILLE,
    MultiIndex,
    WeightSpec,
    check_alpha,
    nids_prefactor,
)
from .special import beta_half, gamma

SUBSTITUTION = "substitution"
PLAIN = "plain"
MONTE_CARLO = "montecarlo"

_GRADING_RATIO = 0.15
_CHUNK = 1 << 22


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = SUBSTITUTION
    nodes_per_panel: int = 16
    panels: int = 4
    rel_tol: float = 1e-10
    grading: int = 12
    seed: int | None = None
    samples: int = 100_000

    def __post_init__(self):
        if self.rule not in (SUBSTITUTION, PLAIN, MONTE_CARLO):
            raise ValidationError(f"unknown quadrature rule {self.rule!r}")
        if self.nodes_per_panel < 2:
            raise ValidationError("nodes_per_panel must be >= 2")
        if self.panels < 1:
            raise ValidationError("panels must be >= 1")
        if not self.rel_tol > 0:
            raise ValidationError("rel_tol must be > 0")
        if self.grading < 0:
            raise ValidationError("grading must be >= 0")
        if self.rule == MONTE_CARLO and self.seed is None:
            raise ValidationError("Monte Carlo quadrature needs an explicit seed")

    def refined(self):
        return QuadratureSpec(
            self.rule, self.nodes_per_panel, 2 * self.panels, self.rel_tol, self.grading,
            self.seed, self.samples,
        )


DEFAULT = QuadratureSpec()


@dataclass(frozen=True)
class Box3:
    """Axis-aligned box; intervals may straddle the coordinate planes."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if len(ivs) != 3:
            raise ValidationError("a box needs three intervals")
        for a, b in ivs:
            if not a < b:
                raise ValidationError(f"interval [{a}, {b}] is empty")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def cube(cls, lo, hi):
        return cls(((lo, hi),) * 3)

    def __getitem__(self, k):
        return self.intervals[k]


def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _panel_edges(lo, hi, panels, grade_left, grading):
    edges = np.linspace(lo, hi, panels + 1)
    if grade_left and grading:
        first = edges[1] - lo
        inner = lo + first * _GRADING_RATIO ** np.arange(grading, 0, -1)
        edges = np.concatenate(([lo], inner, edges[1:]))
    return edges


def _composite_gl(edges, n):
    t, wt = _gauss_legendre(n)
    a = edges[:-1, None]
    b = edges[1:, None]
    nodes = 0.5 * (b - a) * t[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * wt[None, :]
    return nodes.ravel(), weights.ravel()


def _family_geometry(spec):
    """Prefactor ``p``, anchor and orientation so the weight is ``p |t|**(a-1)``."""
    a = spec.alpha
    if spec.family == NIDS:
        return nids_prefactor(a), 0.0, 1.0
    if spec.family == RIEMANN_LIOUVILLE:
        return 1.0 / gamma(a), spec.anchor, 1.0
    if spec.family == MODIFIED_RL:
        return a, spec.anchor, -1.0
    raise ValidationError(f"unknown family {spec.family!r}")


def axis_rule(interval, spec, q=DEFAULT):
    """Nodes ``x_i`` and weights ``w_i`` with ``sum w_i f(x_i) ~ int f c1 dx``."""
    if not isinstance(spec, WeightSpec):
        spec = WeightSpec(spec)
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValidationError(f"interval [{lo}, {hi}] is empty")
    alpha = spec.alpha
    pref, anchor, orient = _family_geometry(spec)
    # t is the distance-like variable in which the weight is p |t|**(alpha-1)
    t_lo, t_hi = sorted((orient * (lo - anchor), orient * (hi - anchor)))
    pieces = [(t_lo, t_hi)] if (t_lo >= 0 or t_hi <= 0) else [(t_lo, 0.0), (0.0, t_hi)]
    scale = pref / alpha
    xs, ws = [], []
    for a, b in pieces:
        sign = 1.0 if b > 0 else -1.0
        ra, rb = sorted((abs(a), abs(b)))
        if q.rule == PLAIN:
            edges = _panel_edges(ra, rb, q.panels, False, 0)
            r, w = _composite_gl(edges, q.nodes_per_panel)
            w = w * pref * r ** (alpha - 1.0)
        else:
            ua, ub = scale * ra**alpha, scale * rb**alpha
            # grade towards the origin when the interval touches it (integrands
            # such as exp(-r) have a cusp there) or, for alpha != 1, when the
            # branch point of x(u) at u = 0 lies within one panel width
            near = ra == 0.0 or (alpha != 1.0 and ua < (ub - ua) / q.panels)
            edges = _panel_edges(ua, ub, q.panels, near, q.grading)
            u, w = _composite_gl(edges, q.nodes_per_panel)
            r = (u / scale) ** (1.0 / alpha)
        xs.append(anchor + orient * sign * r)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _call1(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    return y


def _check(value, coarse, scale, q, what):
    disagreement = abs(value - coarse)
    if disagreement > q.rel_tol * max(abs(value), scale, 1e-300):
        raise ToleranceNotMet(
            f"{what}: refinement disagreement {disagreement:.3e} exceeds rel_tol {q.rel_tol:.1e}",
            estimate=value,
            disagreement=disagreement,
        )
    return disagreement


def integrate_1d(f, interval, spec_w, q=DEFAULT, full_output=False):
    """``int_a^b f(x) c1(alpha, x) dx``.

    ``spec_w`` is a :class:`WeightSpec` or a bare ``alpha`` (NIDS family).
    The result uses ``2 * q.panels`` panels; the disagreement with
    ``q.panels`` panels is the error estimate.  With ``full_output=True``
    returns ``(value, disagreement)``.
    """
    if q.rule == MONTE_CARLO:
        raise ValidationError("use mc_integrate_product for Monte Carlo estimates")
    x0, w0 = axis_rule(interval, spec_w, q)
    x1, w1 = axis_rule(interval, spec_w, q.refined())
    f1 = _call1(f, x1)
    coarse = float(np.dot(w0, _call1(f, x0)))
    value = float(np.dot(w1, f1))
    dis = _check(value, coarse, float(np.dot(w1, np.abs(f1))), q, "integrate_1d")
    return (value, dis) if full_output else value


def _tensor_sum(f, rules):
    (x1, w1), (x2, w2), (x3, w3) = rules
    X2 = x2[:, None]
    X3 = x3[None, :]
    step = max(1, _CHUNK // (x2.size * x3.size))
    total = 0.0
    abs_total = 0.0
    for s in range(0, x1.size, step):
        xa = x1[s:s + step, None, None]
        vals = np.broadcast_to(np.asarray(f(xa, X2[None], X3[None]), dtype=float),
                               (xa.shape[0], x2.size, x3.size))
        # x3 innermost, then x2, then x1, in a fixed order
        inner = vals @ w3
        total += float(w1[s:s + step] @ (inner @ w2))
        abs_total += float(w1[s:s + step] @ ((np.abs(vals) @ w3) @ w2))
    return total, abs_total


def _as_multi(alphas):
    return alphas if isinstance(alphas, MultiIndex) else MultiIndex(tuple(alphas), relaxed=True)


def integrate_product(f, box, alphas, q=DEFAULT, full_output=False):
    """Integral of ``f(x1, x2, x3)`` over ``box`` against the product measure.

    ``f`` must broadcast over numpy arrays.  Each axis uses the same rule as
    :func:`integrate_1d`, so separable integrands factor exactly.
    """
    if q.rule == MONTE_CARLO:
        raise ValidationError("use mc_integrate_product for Monte Carlo estimates")
    if not isinstance(box, Box3):
        box = Box3(box)
    alphas = _as_multi(alphas)
    fine = q.refined()
    coarse_rules = [axis_rule(box[k], alphas[k], q) for k in range(3)]
    fine_rules = [axis_rule(box[k], alphas[k], fine) for k in range(3)]
    coarse, _ = _tensor_sum(f, coarse_rules)
    value, scale = _tensor_sum(f, fine_rules)
    dis = _check(value, coarse, scale, q, "integrate_product")
    return (value, dis) if full_output else value


def radial_integral(f, D, rmax, q=DEFAULT, full_output=False):
    """``2 pi**(D/2) / Gamma(D/2) * int_0^rmax f(r) r**(D-1) dr`` via ``u = r**D``."""
    D = check_alpha(D, "D")
    if not rmax > 0:
        raise ValidationError(f"rmax must be > 0, got {rmax}")
    area = 2.0 * math.pi ** (0.5 * D) / gamma(0.5 * D)

    def at(spec):
        edges = _panel_edges(0.0, float(rmax) ** D, spec.panels, D != 1.0, spec.grading)
        u, w = _composite_gl(edges, spec.nodes_per_panel)
        vals = _call1(f, u ** (1.0 / D))
        return area / D * float(np.dot(w, vals)), area / D * float(np.dot(w, np.abs(vals)))

    coarse, _ = at(q)
    value, scale = at(q.refined())
    dis = _check(value, coarse, scale, q, "radial_integral")
    return (value, dis) if full_output else value


def _jacobi_quarter(mu, nu, n):
    """``int_0^{pi/4} sin(x)**(mu-1) cos(x)**(nu-1) dx`` with Gauss-Jacobi at the origin."""
    t, w = roots_jacobi(n, 0.0, mu - 1.0)
    h = math.pi / 8.0
    x = h * (1.0 + t)
    sinc = np.sin(x) / x
    smooth = sinc ** (mu - 1.0) * np.cos(x) ** (nu - 1.0)
    return float(h**mu * np.dot(w, smooth))


def _half_angle_integral(mu, nu, q):
    """``int_0^{pi/2} sin**(mu-1) cos**(nu-1)``, split at pi/4 so each half has one singular end."""
    mu = check_alpha(mu, "mu")
    nu = check_alpha(nu, "nu")
    n = max(q.nodes_per_panel * q.panels, 8)
    coarse = _jacobi_quarter(mu, nu, n) + _jacobi_quarter(nu, mu, n)
    value = _jacobi_quarter(mu, nu, 2 * n) + _jacobi_quarter(nu, mu, 2 * n)
    return value, coarse


def angular_integral_phi(alpha1, alpha2, q=DEFAULT, full_output=False):
    """``int_0^{2 pi} |cos p|**(alpha1-1) |sin p|**(alpha2-1) dp`` by quadrature."""
    value, coarse = _half_angle_integral(alpha2, alpha1, q)
    value, coarse = 4.0 * value, 4.0 * coarse
    dis = _check(value, coarse, abs(value), q, "angular_integral_phi")
    return (value, dis) if full_output else value


def angular_integral_theta(alpha12, alpha3, q=DEFAULT, full_output=False):
    """``int_0^pi |sin t|**(alpha12-1) |cos t|**(alpha3-1) dt`` by quadrature."""
    value, coarse = _half_angle_integral(alpha12, alpha3, q)
    value, coarse = 2.0 * value, 2.0 * coarse
    dis = _check(value, coarse, abs(value), q, "angular_integral_theta")
    return (value, dis) if full_output else value


def angular_phi_closed_form(alpha1, alpha2):
    return 2.0 * beta_half(alpha1, alpha2)


def angular_theta_closed_form(alpha12, alpha3):
    return beta_half(alpha12, alpha3)


def mc_integrate_product(f, box, alphas, seed, n):
    """Monte Carlo estimate ``(value, stderr)`` of :func:`integrate_product`.

    Each axis is sampled uniformly in its effective coordinate, which is
    importance sampling with the density of states itself; the Jacobian is
    the constant box measure.  A Philox counter-based generator keyed by
    ``seed`` makes the estimate bit-reproducible.
    """
    if seed is None:
        raise ValidationError("seed is mandatory")
    n = int(n)
    if n < 1000:
        raise ValidationError(f"need at least 1000 samples, got {n}")
    if not isinstance(box, Box3):
        box = Box3(box)
    alphas = _as_multi(alphas)
    rng = np.random.Generator(np.random.Philox(int(seed)))
    lo, span, scale = [], [], []
    for k in range(3):
        s = nids_prefactor(alphas[k]) / alphas[k]
        a, b = box[k]
        ua = s * math.copysign(abs(a) ** alphas[k], a)
        ub = s * math.copysign(abs(b) ** alphas[k], b)
        lo.append(ua)
        span.append(ub - ua)
        scale.append(s)
    volume = span[0] * span[1] * span[2]
    total = 0.0
    total_sq = 0.0
    chunk = 1 << 18
    done = 0
    while done < n:
        m = min(chunk, n - done)
        u = rng.random((3, m))
        xs = []
        for k in range(3):
            uk = lo[k] + span[k] * u[k]
            xs.append(np.sign(uk) * (np.abs(uk) / scale[k]) ** (1.0 / alphas[k]))
        vals = np.broadcast_to(np.asarray(f(*xs), dtype=float), (m,))
        total += float(np.sum(vals))
        total_sq += float(np.dot(vals, vals))
        done += m
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return volume * mean, volume * math.sqrt(var / n)


def gaussian_tail(D, halfwidth):
    """Upper bound on the mass of ``exp(-r**2)`` outside the cube ``[-b, b]**3``.

    The cube contains the ball of radius ``b``; the bound is the measure of
    the exterior of that ball, ``pi**(D/2) Q(D/2, b**2)``.
    """
    D = check_alpha(D, "D")
    return math.pi ** (0.5 * D) * float(gammaincc(0.5 * D, float(halfwidth) ** 2))


def gaussian_halfwidth(D, tol):
    """Smallest half-width (to 1e-3) whose :func:`gaussian_tail` is below ``tol``."""
    if not tol > 0:
        raise InvalidDimension("tol must be > 0")
    b = 1.0
    while gaussian_tail(D, b) > tol:
        b *= 1.25
    lo, hi = 0.0, b
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if gaussian_tail(D, mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi
