"""Gradient, divergence, curl and Laplacians in non-integer dimension.

The density of states plays the role of Lame coefficients, ``H_k =
c1(alpha_k, x_k)``, and every first-order operator is built from

    partial_alpha_k = (1 / c1(alpha_k, x_k)) d/dx_k = d/dX_k.

Fields are opaque callables ``f(x1, x2, x3)`` that broadcast over numpy
arrays; derivatives are taken by fourth-order central differences in the
physical coordinate with one level of Richardson extrapolation.  Operators
return new fields, so compositions such as ``div(grad f)`` nest naturally.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .measure import MultiIndex, effective_x, nids_prefactor, nids_weight
from .quadrature import Box3

UNIFORM_PHYSICAL = "physical"
UNIFORM_EFFECTIVE = "effective"

# alternating symbol as (i, j, k, sign) triples with sign != 0
LEVI_CIVITA = (
    (0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
    (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0),
)


@dataclass(frozen=True)
class FiniteDifference:
    """Step control: ``h = step * max(1, |x|)``, capped at ``|x| / 4`` on singular axes.

    ``richardson`` is the number of extrapolation levels applied on top of
    the fourth-order stencils (0, 1 or 2).  ``extended=True`` evaluates the
    stencils in ``numpy.longdouble``; nested derivatives then lose
    ``eps_ld / h**2`` instead of ``eps / h**2`` to cancellation, provided the
    field itself is written with numpy ufuncs that keep the dtype.
    """

    step: float = 5e-3
    richardson: int = 1
    extended: bool = False

    def __post_init__(self):
        if not self.step > 0:
            raise ValidationError("fd step must be > 0")
        if self.richardson not in (0, 1, 2):
            raise ValidationError("richardson levels must be 0, 1 or 2")


DEFAULT_FD = FiniteDifference()


def _d1(g, x, h):
    return (g(x - 2 * h) - 8.0 * g(x - h) + 8.0 * g(x + h) - g(x + 2 * h)) / (12.0 * h)


def _d2(g, x, h):
    return (-g(x - 2 * h) + 16.0 * g(x - h) - 30.0 * g(x) + 16.0 * g(x + h) - g(x + 2 * h)) / (
        12.0 * h * h
    )


def as_real(x):
    """``x`` as a float array, keeping ``longdouble`` input intact."""
    x = np.asarray(x)
    return x if x.dtype == np.longdouble else x.astype(float)


def derivative(g, x, order=1, fd=DEFAULT_FD, singular_at_zero=False, max_step=None):
    """First or second derivative of a univariate callable at ``x``.

    ``max_step`` (scalar or array) caps the base step, e.g. to keep the
    stencil inside the domain of ``g``.
    """
    x = np.asarray(x, dtype=np.longdouble) if fd.extended else as_real(x)
    h = fd.step * np.maximum(1.0, np.abs(x))
    if singular_at_zero:
        if np.any(x == 0.0):
            raise DomainError("derivative requested on the singular plane x = 0")
        h = np.minimum(h, np.abs(x) / 4.0)
    if max_step is not None:
        h = np.minimum(h, max_step)
    rule = _d1 if order == 1 else _d2
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    # central differences have error expansions in h**4, h**6, ...
    table = [rule(g, x, h / 2**i) for i in range(fd.richardson + 1)]
    for level, factor in zip(range(fd.richardson), (16.0, 64.0)):
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
    return table[0]


class ScalarField:
    """A scalar function of ``(x1, x2, x3)``; optionally tied to a :class:`Box3`."""

    def __init__(self, func, domain=None, name=None):
        self.func = func
        self.domain = domain
        self.name = name or getattr(func, "__name__", "field")

    def __call__(self, x1, x2, x3):
        return self.func(x1, x2, x3)

    def __repr__(self):
        return f"ScalarField({self.name})"


class VectorField:
    """Three scalar components in the orthonormal frame ``e_k``."""

    def __init__(self, components, domain=None, name=None):
        comps = tuple(c if isinstance(c, ScalarField) else ScalarField(c, domain) for c in components)
        if len(comps) != 3:
            raise ValidationError("a vector field needs three components")
        self.components = comps
        self.domain = domain
        self.name = name or "vector"

    def __getitem__(self, k):
        return self.components[k]

    def __iter__(self):
        return iter(self.components)

    def __call__(self, x1, x2, x3):
        return np.stack([np.broadcast_to(c(x1, x2, x3), np.broadcast(x1, x2, x3).shape)
                         for c in self.components])


def as_scalar_field(f):
    return f if isinstance(f, ScalarField) else ScalarField(f)


def as_vector_field(u):
    return u if isinstance(u, VectorField) else VectorField(u)


@dataclass(frozen=True)
class LameFrame:
    """Diagonal metric ``g_kk = H_k**2`` with ``H_k = c1(alpha_k, x_k)``."""

    alphas: MultiIndex
    fd: FiniteDifference = DEFAULT_FD

    def __post_init__(self):
        if not isinstance(self.alphas, MultiIndex):
            object.__setattr__(self, "alphas", MultiIndex(tuple(self.alphas), relaxed=True))

    def lame(self, k, xk):
        return nids_weight(self.alphas[k], xk)

    def metric(self, x1, x2, x3):
        """Diagonal of ``g_kl`` at the point(s)."""
        return np.stack([self.lame(k, xk) ** 2 for k, xk in enumerate((x1, x2, x3))])

    def jacobian(self, x1, x2, x3):
        """``sqrt(det g) = H1 H2 H3``."""
        return self.lame(0, x1) * self.lame(1, x2) * self.lame(2, x3)

    def singular(self, k):
        return self.alphas[k] != 1.0


def _replace(point, k, t):
    p = list(point)
    p[k] = t
    return p


def _axis_derivative(f, k, point, frame, order=1):
    point = [np.asarray(v, dtype=float) for v in point]

    def g(t):
        return f(*_replace(point, k, t))

    return derivative(g, point[k], order, frame.fd, frame.singular(k))


def _check_plane(frame, k, xk):
    if frame.singular(k) and np.any(np.asarray(xk) == 0.0):
        raise DomainError(f"operator singular on the plane x_{k + 1} = 0 for alpha={frame.alphas[k]}")


def partial_alpha(f, k, frame, at):
    """``(1/c1(alpha_k, x_k)) df/dx_k`` at the point ``at = (x1, x2, x3)``."""
    _check_plane(frame, k, at[k])
    return _axis_derivative(f, k, at, frame) / frame.lame(k, np.asarray(at[k], dtype=float))


def _partial_field(f, k, frame):
    def df(x1, x2, x3):
        return partial_alpha(f, k, frame, (x1, x2, x3))

    return ScalarField(df, name=f"d{k + 1}")


def grad_alpha(f, frame, covariant=False):
    """Gradient field.

    Components are ``(1/H_k) df/dx_k`` in the orthonormal frame.  With
    ``covariant=True`` the components are ``(1/H_k**2) df/dx_k``, the form
    obtained by raising the index with the inverse metric.
    """
    f = as_scalar_field(f)
    if not covariant:
        return VectorField([_partial_field(f, k, frame) for k in range(3)], name="grad")

    def comp(k):
        def gk(x1, x2, x3):
            at = (x1, x2, x3)
            _check_plane(frame, k, at[k])
            return _axis_derivative(f, k, at, frame) / frame.lame(k, np.asarray(at[k], dtype=float)) ** 2

        return ScalarField(gk)

    return VectorField([comp(k) for k in range(3)], name="grad_cov")


def div_alpha(u, frame):
    u = as_vector_field(u)

    def div(x1, x2, x3):
        at = (x1, x2, x3)
        return sum(partial_alpha(u[k], k, frame, at) for k in range(3))

    return ScalarField(div, name="div")


def curl_alpha(u, frame):
    """``(curl u)_i = sum_jk eps_ijk partial_alpha_j u_k``."""
    u = as_vector_field(u)

    def comp(i):
        terms = [(j, k, s) for (ii, j, k, s) in LEVI_CIVITA if ii == i]

        def ci(x1, x2, x3):
            at = (x1, x2, x3)
            return sum(s * partial_alpha(u[k], j, frame, at) for j, k, s in terms)

        return ScalarField(ci)

    return VectorField([comp(i) for i in range(3)], name="curl")


def scalar_laplacian(f, frame):
    """Expanded form ``sum_k (f'' - (alpha_k - 1)/x_k f') / c1(alpha_k, x_k)**2``."""
    f = as_scalar_field(f)

    def lap(x1, x2, x3):
        at = [np.asarray(v, dtype=float) for v in (x1, x2, x3)]
        total = 0.0
        for k in range(3):
            _check_plane(frame, k, at[k])
            a = frame.alphas[k]
            d2 = _axis_derivative(f, k, at, frame, order=2)
            term = d2
            if a != 1.0:
                term = d2 - (a - 1.0) / at[k] * _axis_derivative(f, k, at, frame)
            total = total + term / frame.lame(k, at[k]) ** 2
        return total

    return ScalarField(lap, name="laplacian")


def vector_laplacian(u, frame):
    """``grad div u - curl curl u``."""
    u = as_vector_field(u)
    g = grad_alpha(div_alpha(u, frame), frame)
    cc = curl_alpha(curl_alpha(u, frame), frame)

    def comp(k):
        return ScalarField(lambda x1, x2, x3: g[k](x1, x2, x3) - cc[k](x1, x2, x3))

    return VectorField([comp(k) for k in range(3)], name="vector_laplacian")


def laplace_beltrami(f, frame):
    """``(1/sqrt g) d_k (sqrt g g^kk d_k f)`` evaluated from the metric itself."""
    f = as_scalar_field(f)

    def lb(x1, x2, x3):
        at = [np.asarray(v, dtype=float) for v in (x1, x2, x3)]
        total = 0.0
        for k in range(3):
            _check_plane(frame, k, at[k])

            def flux(*p, k=k):
                dk = _axis_derivative(f, k, p, frame)
                return frame.jacobian(*p) / frame.metric(*p)[k] * dk

            total = total + _axis_derivative(flux, k, at, frame)
        return total / frame.jacobian(*at)

    return ScalarField(lb, name="laplace_beltrami")


# -- structured grids --------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid over ``box``; nodes uniform in ``x`` or in the effective ``X``."""

    box: Box3
    nodes: tuple
    alphas: MultiIndex
    spacing: str = UNIFORM_EFFECTIVE

    def __post_init__(self):
        if not isinstance(self.box, Box3):
            object.__setattr__(self, "box", Box3(self.box))
        if not isinstance(self.alphas, MultiIndex):
            object.__setattr__(self, "alphas", MultiIndex(tuple(self.alphas), relaxed=True))
        nodes = tuple(int(n) for n in self.nodes)
        if len(nodes) != 3 or min(nodes) < 3:
            raise ValidationError("need at least 3 nodes on each of the three axes")
        object.__setattr__(self, "nodes", nodes)
        if self.spacing not in (UNIFORM_PHYSICAL, UNIFORM_EFFECTIVE):
            raise ValidationError(f"unknown spacing {self.spacing!r}")
        for k, (a, _) in enumerate(self.box.intervals):
            if self.alphas[k] != 1.0 and a <= 0.0:
                raise DomainError(f"grid axis {k + 1} must stay in x > 0 when alpha != 1")

    def axis(self, k):
        """Physical and effective node coordinates along axis ``k``."""
        a, b = self.box[k]
        alpha = self.alphas[k]
        if self.spacing == UNIFORM_PHYSICAL:
            x = np.linspace(a, b, self.nodes[k])
            return x, effective_x(alpha, x)
        X = np.linspace(effective_x(alpha, a), effective_x(alpha, b), self.nodes[k])
        s = nids_prefactor(alpha) / alpha
        x = np.sign(X) * (np.abs(X) / s) ** (1.0 / alpha)
        x[0], x[-1] = a, b
        return x, X

    def mesh(self):
        xs = [self.axis(k)[0] for k in range(3)]
        return np.meshgrid(*xs, indexing="ij")

    def sample(self, f):
        return np.broadcast_to(np.asarray(f(*self.mesh()), dtype=float), self.nodes).copy()


def grid_partial(values, k, grid):
    """``d/dX_k`` of sampled values by second-order (possibly variable-spacing) stencils."""
    return np.gradient(values, grid.axis(k)[1], axis=k, edge_order=2)


def grid_gradient(values, grid):
    return np.stack([grid_partial(values, k, grid) for k in range(3)])


def grid_divergence(components, grid):
    return sum(grid_partial(components[k], k, grid) for k in range(3))


def grid_curl(components, grid):
    out = np.zeros_like(np.asarray(components, dtype=float))
    for i, j, k, s in LEVI_CIVITA:
        out[i] += s * grid_partial(components[k], j, grid)
    return out


def grid_laplacian(values, grid):
    return grid_divergence(grid_gradient(values, grid), grid)
