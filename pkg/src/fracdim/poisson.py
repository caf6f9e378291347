"""Single-variable Poisson problems for the NEWS and K2 Laplacians.

On ``x > 0`` the two operators read

    news:  (phi'' - (alpha - 1)/x phi') / c1(alpha, x)**2
    k2:     phi'' + (alpha - 1)/x phi' + (alpha - 1)(alpha - 3)/(4 x**2) phi

Both are second-order linear with power-law homogeneous solutions, so the
general solution follows from variation of parameters.  The numeric solver
is an independent finite-difference route used to cross-check it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import BPoly

from . import _kernels
from .altops import K2, NEWS, LaplacianSpec
from .diffops import FiniteDifference, derivative
from .errors import DomainError, GridTooCoarse, SingularBoundarySystem, ValidationError
from .measure import check_alpha, effective_x, inverse_effective_x, nids_prefactor
from .special import gamma

OPERATORS = (NEWS, K2)
RESIDUAL_POINTS = 200
# the residual step is relative to x: h = step * x
RESIDUAL_FD = FiniteDifference(step=0.1, richardson=2)
SINGULAR_CONDITION = 1e12
COARSE_LIMIT = 1e-4


def _kind(operator):
    kind = operator.kind if isinstance(operator, LaplacianSpec) else str(operator).lower()
    if kind not in OPERATORS:
        raise ValidationError(f"Poisson solvers support {OPERATORS}, got {kind!r}")
    return kind


def _source(f):
    def g(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)

    return g


@dataclass(frozen=True)
class PoissonProblem:
    """``L phi = f`` on ``[a, b]`` with ``a > 0``.

    Give ``bc = (phi(a), phi(b))`` for a Dirichlet problem, or
    ``constants = (C1, C2)`` to pick one member of the general solution.
    """

    operator: str
    alpha: float
    f: Callable
    interval: tuple = (0.1, 2.0)
    bc: tuple | None = (0.0, 0.0)
    constants: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "operator", _kind(self.operator))
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        a, b = (float(v) for v in self.interval)
        if not a > 0.0:
            raise DomainError(f"the interval must lie in x > 0, got a={a}")
        if not b > a:
            raise ValidationError(f"need b > a, got [{a}, {b}]")
        object.__setattr__(self, "interval", (a, b))
        if (self.bc is None) == (self.constants is None):
            raise ValidationError("give exactly one of bc or constants")
        if self.bc is not None:
            object.__setattr__(self, "bc", tuple(float(v) for v in self.bc))
        else:
            object.__setattr__(self, "constants", tuple(float(v) for v in self.constants))


@dataclass
class PoissonSolution:
    """``phi`` with its homogeneous constants and the max residual on 200 points.

    ``constants`` is ``None`` for the numeric solver, which never forms the
    homogeneous basis.
    """

    phi: Callable
    constants: tuple | None
    residual_norm: float
    method: str
    error_estimate: float | None = None
    residual: Callable | None = None

    def __call__(self, x):
        return self.phi(x)

    def residual_on(self, xs):
        """``max |L phi - f|`` over other points, measured the same way."""
        return float(np.max(np.abs(self.residual(np.asarray(xs, dtype=float)))))


# -- operators and bases ------------------------------------------------------


def operator_coefficients(operator, alpha, x):
    """``(A, B, C)`` with ``L phi = A phi'' + B phi' + C phi``."""
    kind = _kind(operator)
    x = np.asarray(x, dtype=float)
    a = alpha
    if kind == NEWS:
        c2 = (nids_prefactor(a) * x ** (a - 1.0)) ** 2
        return 1.0 / c2, -(a - 1.0) / x / c2, np.zeros_like(x)
    return np.ones_like(x), (a - 1.0) / x, (a - 1.0) * (a - 3.0) / (4.0 * x * x)


def apply_operator(operator, alpha, phi, x, fd=RESIDUAL_FD):
    """``L phi`` at ``x > 0`` by finite differences of the callable ``phi``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("the operators are defined for x > 0")
    A, B, C = operator_coefficients(operator, alpha, x)
    # power-law solutions vary on the scale x, so the step is a fixed fraction of it
    cap = fd.step * x
    d2 = derivative(phi, x, 2, fd, singular_at_zero=True, max_step=cap)
    d1 = derivative(phi, x, 1, fd, singular_at_zero=True, max_step=cap)
    return A * d2 + B * d1 + C * phi(x)


@dataclass(frozen=True)
class PowerFunction:
    """``x**p`` with exact derivatives."""

    p: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x**self.p if self.p != 0.0 else np.ones_like(x)

    def derivative(self, order=1, x=None):
        c, q = 1.0, self.p
        for _ in range(order):
            c, q = c * q, q - 1.0
        return lambda t: c * np.asarray(t, dtype=float) ** q

    def __repr__(self):
        return f"x**{self.p:g}"


def poisson_homogeneous_basis(operator, alpha):
    """Two independent solutions of ``L h = 0`` on ``x > 0``.

    NEWS: ``1`` and ``x**alpha``.  K2: ``x**((3-alpha)/2)`` and
    ``x**((1-alpha)/2)``.
    """
    kind = _kind(operator)
    a = check_alpha(alpha)
    if kind == NEWS:
        return PowerFunction(0.0), PowerFunction(a)
    return PowerFunction(0.5 * (3.0 - a)), PowerFunction(0.5 * (1.0 - a))


def wronskian(operator, alpha, x):
    h1, h2 = poisson_homogeneous_basis(operator, alpha)
    return h1(x) * h2.derivative()(x) - h1.derivative()(x) * h2(x)


# -- quadrature for the indefinite integrals ---------------------------------


class Antiderivative:
    """``F(x) = int_a^x g`` by composite Gauss-Legendre on a fixed partition.

    Panels combine uniform and geometric spacing so both ends of wide
    intervals near the origin are resolved.  ``F`` is evaluated at any
    ``x > 0``, slightly outside ``[a, b]`` as well.
    """

    def __init__(self, g, a, b, panels=32, nodes=20):
        self.g = g
        edges = np.union1d(np.linspace(a, b, panels + 1), np.geomspace(a, b, panels + 1))
        self.edges = edges
        t, w = np.polynomial.legendre.leggauss(nodes)
        self._t = 0.5 * (t + 1.0)
        self._w = 0.5 * w
        lo, hi = edges[:-1], edges[1:]
        pts = lo[:, None] + (hi - lo)[:, None] * self._t
        panel = (hi - lo) * (g(pts) @ self._w)
        self.cumulative = np.concatenate([[0.0], np.cumsum(panel)])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        idx = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, len(self.edges) - 2)
        left = self.edges[idx]
        pts = left[:, None] + (flat - left)[:, None] * self._t
        part = (flat - left) * (self.g(pts) @ self._w)
        out = (self.cumulative[idx] + part).reshape(x.shape)
        return out if out.ndim else float(out)


def _particular(kind, alpha, f, a, b):
    # phi_p = -h1 int h2 r / W + h2 int h1 r / W,  r = f / A
    h1, h2 = poisson_homogeneous_basis(kind, alpha)

    def ratio(x):
        A, _, _ = operator_coefficients(kind, alpha, x)
        return f(x) / A / wronskian(kind, alpha, x)

    I1 = Antiderivative(lambda x: h2(x) * ratio(x), a, b)
    I2 = Antiderivative(lambda x: h1(x) * ratio(x), a, b)
    return lambda x: -h1(x) * I1(x) + h2(x) * I2(x)


def residual_norm(operator, alpha, f, phi, xs):
    """``max |L phi - f|`` over the points ``xs``, by finite differences."""
    xs = np.asarray(xs, dtype=float)
    r = apply_operator(operator, alpha, phi, xs) - _source(f)(xs)
    return float(np.max(np.abs(r)))


def residual_grid(interval, n=RESIDUAL_POINTS):
    """Chebyshev-Lobatto points on ``interval``.

    They crowd towards the ends, where the residual of both solvers is
    largest, and do not alias with a uniform solver grid.
    """
    a, b = interval
    xs = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.linspace(0.0, np.pi, n))
    xs[0], xs[-1] = a, b
    return xs


def poisson_solve_analytic(problem):
    """General solution by variation of parameters, constants fitted to the data."""
    kind, alpha = problem.operator, problem.alpha
    a, b = problem.interval
    f = _source(problem.f)
    h1, h2 = poisson_homogeneous_basis(kind, alpha)
    phi_p = _particular(kind, alpha, f, a, b)
    if problem.bc is not None:
        M = np.array([[h1(a), h2(a)], [h1(b), h2(b)]], dtype=float)
        cond = float(np.linalg.cond(M))
        if not cond < SINGULAR_CONDITION:
            raise SingularBoundarySystem(
                f"boundary system is rank-deficient (condition number {cond:.3g})", condition=cond
            )
        rhs = np.array([problem.bc[0] - phi_p(a), problem.bc[1] - phi_p(b)])
        C1, C2 = (float(v) for v in np.linalg.solve(M, rhs))
    else:
        C1, C2 = problem.constants

    def phi(x):
        return C1 * h1(x) + C2 * h2(x) + phi_p(x)

    def residual(xs):
        return apply_operator(kind, alpha, phi, xs) - f(xs)

    res = float(np.max(np.abs(residual(residual_grid(problem.interval)))))
    return PoissonSolution(phi=phi, constants=(C1, C2), residual_norm=res, method="analytic",
                           residual=residual)


# -- finite differences --------------------------------------------------------


def _fd_news(problem, n):
    # in u = X(x) the operator is d2/du2
    alpha = problem.alpha
    a, b = problem.interval
    u = np.linspace(effective_x(alpha, a), effective_x(alpha, b), n)
    h = u[1] - u[0]
    x = inverse_effective_x(alpha, u)
    x[0], x[-1] = a, b
    m = n - 2
    rhs = h * h * _source(problem.f)(x[1:-1])
    rhs[0] -= problem.bc[0]
    rhs[-1] -= problem.bc[1]
    inner = _kernels.ACTIVE.thomas(np.ones(m), np.full(m, -2.0), np.ones(m), rhs)
    return u, np.concatenate([[problem.bc[0]], inner, [problem.bc[1]]])


def _fd_k2(problem, n):
    alpha = problem.alpha
    a, b = problem.interval
    x = np.linspace(a, b, n)
    h = x[1] - x[0]
    xi = x[1:-1]
    _, B, C = operator_coefficients(K2, alpha, xi)
    lower = 1.0 - 0.5 * h * B
    upper = 1.0 + 0.5 * h * B
    diag = -2.0 + h * h * C
    rhs = h * h * _source(problem.f)(xi)
    rhs[0] -= lower[0] * problem.bc[0]
    rhs[-1] -= upper[-1] * problem.bc[1]
    inner = _kernels.ACTIVE.thomas(lower, diag, upper, rhs)
    return x, np.concatenate([[problem.bc[0]], inner, [problem.bc[1]]])


def _hermite(s, y, y2):
    """Quintic Hermite interpolant from values and exact second derivatives.

    Interior slopes come from central differences corrected by the third
    derivative, itself the difference quotient of ``y2``.  End slopes use
    ``y1 - y0 = h y0' + h**2 (2 y0'' + y1'') / 6 - h**4 y0'''' / 24`` with
    the fourth derivative from ``y2``, so every slope is fourth-order.
    """
    h = s[1] - s[0]
    y3 = np.gradient(y2, h, edge_order=2)
    y1 = np.gradient(y, h, edge_order=2)
    y1[1:-1] -= h * h / 6.0 * y3[1:-1]
    y1[0] = ((y[1] - y[0]) / h - h / 6.0 * (2.0 * y2[0] + y2[1])
             + h / 24.0 * (y2[0] - 2.0 * y2[1] + y2[2]))
    y1[-1] = ((y[-1] - y[-2]) / h + h / 6.0 * (2.0 * y2[-1] + y2[-2])
              - h / 24.0 * (y2[-1] - 2.0 * y2[-2] + y2[-3]))
    return BPoly.from_derivatives(s, np.column_stack([y, y1, y2]))


def poisson_solve_numeric(problem, nodes=2001, extrapolate=True):
    """Second-order finite differences with one Richardson step.

    NEWS is solved in the effective coordinate ``u = X(x)`` where it reads
    ``phi_uu = f``; K2 is discretised directly in ``x``.  Solutions on ``n``
    and ``2n - 1`` nodes give the error estimate; above ``1e-4`` the grid is
    rejected.
    """
    if problem.bc is None:
        raise ValidationError("the numeric solver needs Dirichlet data")
    nodes = int(nodes)
    if nodes < 5:
        raise GridTooCoarse(f"need at least 5 nodes, got {nodes}")
    solve = _fd_news if problem.operator == NEWS else _fd_k2
    s, coarse = solve(problem, nodes)
    _, fine = solve(problem, 2 * nodes - 1)
    diff = fine[::2] - coarse
    estimate = float(np.max(np.abs(diff))) / 3.0
    if estimate > COARSE_LIMIT:
        raise GridTooCoarse(f"Richardson error estimate {estimate:.3g} exceeds {COARSE_LIMIT:g}")
    values = fine[::2] + diff / 3.0 if extrapolate else fine[::2]
    alpha = problem.alpha
    f = _source(problem.f)
    a, b = problem.interval
    # both operators are d2/ds2 of a rescaled unknown: NEWS is phi_uu in the
    # effective coordinate and K2 is x**(-m) (x**m phi)'' with m = (alpha-1)/2.
    # That unknown is interpolated and differentiated exactly.
    if problem.operator == NEWS:
        x = inverse_effective_x(alpha, s)
        x[0], x[-1] = a, b
        spline = _hermite(s, values, f(x))
        d2 = spline.derivative(2)

        def phi(x):
            return spline(effective_x(alpha, np.asarray(x, dtype=float)))

        def residual(xs):
            return d2(effective_x(alpha, xs)) - f(xs)
    else:
        m = 0.5 * (alpha - 1.0)
        spline = _hermite(s, s**m * values, s**m * f(s))
        d2 = spline.derivative(2)

        def phi(x):
            x = np.asarray(x, dtype=float)
            return x ** (-m) * spline(x)

        def residual(xs):
            return xs ** (-m) * d2(xs) - f(xs)

    res = float(np.max(np.abs(residual(residual_grid(problem.interval)))))
    return PoissonSolution(phi=phi, constants=None, residual_norm=res, method="numeric",
                           error_estimate=estimate, residual=residual)


# -- the displayed closed forms ---------------------------------------------


@dataclass
class PaperFormCheck:
    """Residual of a displayed particular solution and whether it fails."""

    phi: Callable
    residual_norm: float
    discrepancy: bool
    note: str


def paper_particular_solution(operator, alpha, f, interval=(0.1, 2.0), tol=1e-6):
    """Evaluate the literal closed-form particular solution and report its residual.

    NEWS: ``-(pi**a / (a Gamma(a/2)**2)) (int f x**(2a-1) - x**a int f x**(a-1))``.
    K2:   ``x**((3-a)/2) int f x**((1-a)/2) - x**((1-a)/2) int f x**((1+a)/2)``.
    Integrals run from the left end of ``interval``.  ``discrepancy`` is set
    when the residual exceeds ``tol * (1 + max|f|)``.
    """
    kind = _kind(operator)
    a_ = check_alpha(alpha)
    lo, hi = (float(v) for v in interval)
    f = _source(f)
    if kind == NEWS:
        pref = math.pi**a_ / (a_ * gamma(0.5 * a_) ** 2)
        J1 = Antiderivative(lambda x: f(x) * x ** (2.0 * a_ - 1.0), lo, hi)
        J2 = Antiderivative(lambda x: f(x) * x ** (a_ - 1.0), lo, hi)

        def phi(x):
            x = np.asarray(x, dtype=float)
            return -pref * (J1(x) - x**a_ * J2(x))
    else:
        J1 = Antiderivative(lambda x: f(x) * x ** (0.5 * (1.0 - a_)), lo, hi)
        J2 = Antiderivative(lambda x: f(x) * x ** (0.5 * (1.0 + a_)), lo, hi)

        def phi(x):
            x = np.asarray(x, dtype=float)
            return x ** (0.5 * (3.0 - a_)) * J1(x) - x ** (0.5 * (1.0 - a_)) * J2(x)

    xs = residual_grid((lo, hi))
    res = residual_norm(kind, a_, f, phi, xs)
    scale = 1.0 + float(np.max(np.abs(f(xs))))
    bad = res > tol * scale
    note = "residual within tolerance" if not bad else (
        f"displayed form does not solve the equation: residual {res:.3g}"
    )
    return PaperFormCheck(phi=phi, residual_norm=res, discrepancy=bool(bad), note=note)
