import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdim import diffops
from fracdim.diffops import (
    FiniteDifference,
    GridSpec,
    LameFrame,
    VectorField,
    curl_alpha,
    div_alpha,
    grad_alpha,
    laplace_beltrami,
    partial_alpha,
    scalar_laplacian,
    vector_laplacian,
)
from fracdim.errors import DomainError, ValidationError
from fracdim.measure import MultiIndex, effective_x

ANISO = [(0.7, 1.2, 0.9), (0.5, 0.8, 1.5), (1.3, 0.6, 1.0)]
RNG = np.random.default_rng(7)
PTS = tuple(RNG.uniform(0.4, 2.0, (3, 20)))


def frame(alphas):
    return LameFrame(MultiIndex(alphas, relaxed=True))


def X(a):
    return lambda t: effective_x(a, t)


def test_derivative_accuracy():
    x = np.linspace(0.3, 3.0, 7)
    assert np.max(np.abs(diffops.derivative(np.sin, x) - np.cos(x))) <= 1e-11
    assert np.max(np.abs(diffops.derivative(np.sin, x, 2) + np.sin(x))) <= 1e-9
    ext = FiniteDifference(step=3e-3, richardson=1, extended=True)
    assert np.max(np.abs(diffops.derivative(np.sin, x, 2, ext) + np.sin(x))) <= 1e-12
    with pytest.raises(ValueError):
        diffops.derivative(np.sin, x, 3)
    with pytest.raises(ValidationError):
        FiniteDifference(step=0)


def test_partial_alpha_examples():
    for a in (0.4, 1.0, 1.7):
        fr = frame((a, 1.0, 1.0))
        v = partial_alpha(lambda x, y, z: effective_x(a, x), 0, fr, PTS)
        assert np.max(np.abs(v - 1.0)) <= 1e-9
    assert partial_alpha(lambda x, y, z: x * x, 0, frame((1, 1, 1)), (3.0, 1.0, 1.0)) == pytest.approx(6.0, abs=1e-10)
    fr = frame((0.6, 1, 1))
    val = partial_alpha(lambda x, y, z: effective_x(0.6, x) ** 2, 0, fr, (1.5, 1.0, 1.0))
    assert val == pytest.approx(2 * effective_x(0.6, 1.5), rel=1e-9)


def test_singular_plane():
    with pytest.raises(DomainError):
        partial_alpha(lambda x, y, z: x, 0, frame((0.5, 1, 1)), (0.0, 1.0, 1.0))


def test_grad_examples():
    g = grad_alpha(lambda x, y, z: x + 2 * y + 3 * z, frame((1, 1, 1)))(*PTS)
    for k, c in enumerate((1, 2, 3)):
        assert np.max(np.abs(g[k] - c)) <= 1e-10
    a = ANISO[0]
    g = grad_alpha(lambda x, y, z: effective_x(a[0], x) + 0 * y, frame(a))(*PTS)
    assert np.max(np.abs(g[0] - 1)) <= 1e-9 and np.max(np.abs(g[1:])) <= 1e-9
    g = grad_alpha(lambda x, y, z: x * x + y * y + z * z, frame((1, 1, 1)))(1.0, 2.0, 3.0)
    np.testing.assert_allclose(np.ravel(g), [2, 4, 6], atol=1e-9)


@pytest.mark.parametrize("a", ANISO)
def test_div_examples(a):
    X1, X2, X3 = X(a[0]), X(a[1]), X(a[2])
    fr = frame(a)
    rot = VectorField([lambda x, y, z: X2(y) + 0 * x, lambda x, y, z: -X1(x) + 0 * y, lambda x, y, z: 0 * x])
    assert np.max(np.abs(div_alpha(rot, fr)(*PTS))) <= 1e-9
    ident = VectorField([lambda x, y, z: X1(x) + 0 * y, lambda x, y, z: X2(y) + 0 * z, lambda x, y, z: X3(z) + 0 * x])
    assert np.max(np.abs(div_alpha(ident, fr)(*PTS) - 3)) <= 1e-8
    c = curl_alpha(VectorField([lambda x, y, z: -X2(y) + 0 * x, lambda x, y, z: X1(x) + 0 * y,
                                lambda x, y, z: 0 * x]), fr)(*PTS)
    assert np.max(np.abs(c[:2])) <= 1e-9 and np.max(np.abs(c[2] - 2)) <= 1e-8
    lap = scalar_laplacian(lambda x, y, z: X1(x) ** 2 + X2(y) ** 2 + X3(z) ** 2, fr)(*PTS)
    assert np.max(np.abs(lap - 6)) <= 1e-7


def test_classical_examples():
    fr = frame((1, 1, 1))
    u = VectorField([lambda x, y, z: x, lambda x, y, z: y, lambda x, y, z: z])
    assert np.max(np.abs(div_alpha(u, fr)(*PTS) - 3)) <= 1e-10
    c = curl_alpha(VectorField([lambda x, y, z: -y, lambda x, y, z: x, lambda x, y, z: 0 * z]), fr)(*PTS)
    np.testing.assert_allclose(c[2], 2, atol=1e-10)
    assert scalar_laplacian(lambda x, y, z: x * x * y, fr)(1.0, 1.0, 1.0) == pytest.approx(2.0, abs=1e-8)
    vl = vector_laplacian(VectorField([lambda x, y, z: x * x, lambda x, y, z: 0 * x, lambda x, y, z: 0 * x]), fr)
    np.testing.assert_allclose(vl(*PTS)[0], 2, atol=1e-8)
    np.testing.assert_allclose(vl(*PTS)[1:], 0, atol=1e-8)
    f = lambda x, y, z: x**3 - 2 * x * y * z + z * z
    lb = laplace_beltrami(f, fr)(*PTS)
    np.testing.assert_allclose(lb, 6 * PTS[0] + 2, atol=1e-7)


def test_one_dimensional_cube():
    a = 0.5
    fr = frame((a, 1, 1))
    v = scalar_laplacian(lambda x, y, z: effective_x(a, x) ** 3 + 0 * y, fr)(2.0, 1.0, 1.0)
    assert v == pytest.approx(6 * effective_x(a, 2.0), rel=1e-8)


@pytest.mark.parametrize("a", ANISO)
def test_constants_vanish(a):
    fr = frame(a)
    assert np.max(np.abs(laplace_beltrami(lambda x, y, z: 3.0 + 0 * x, fr)(*PTS))) <= 1e-10
    vl = vector_laplacian(VectorField([lambda x, y, z: 1.0 + 0 * x] * 3), fr)(*PTS)
    assert np.max(np.abs(vl)) <= 1e-10


coef = st.floats(-2.0, 2.0)


@settings(max_examples=15)
@given(st.sampled_from(ANISO), st.lists(coef, min_size=10, max_size=10))
def test_identities_on_random_polynomials(a, c):
    # polynomials of degree <= 2 in the effective coordinates
    X1, X2, X3 = X(a[0]), X(a[1]), X(a[2])

    def f(x, y, z):
        p, q, r = X1(x), X2(y), X3(z)
        return c[0] + c[1] * p + c[2] * q + c[3] * r + c[4] * p * q + c[5] * q * r + c[6] * p * r + c[7] * p * p \
            + c[8] * q * q + c[9] * r * r

    fr = frame(a)
    assert np.max(np.abs(curl_alpha(grad_alpha(f, fr), fr)(*PTS))) <= 1e-5
    u = VectorField([f, lambda x, y, z: f(y, z, x), lambda x, y, z: f(z, x, y)])
    assert np.max(np.abs(div_alpha(curl_alpha(u, fr), fr)(*PTS))) <= 1e-5
    # chain rule: the classical Laplacian of the quadratic form is 2 (c7 + c8 + c9)
    assert np.max(np.abs(scalar_laplacian(f, fr)(*PTS) - 2 * (c[7] + c[8] + c[9]))) <= 1e-6
    g = grad_alpha(f, fr)(*PTS)
    p, q, r = X1(PTS[0]), X2(PTS[1]), X3(PTS[2])
    exact = (c[1] + c[4] * q + c[6] * r + 2 * c[7] * p, c[2] + c[4] * p + c[5] * r + 2 * c[8] * q,
             c[3] + c[5] * q + c[6] * p + 2 * c[9] * r)
    for k in range(3):
        assert np.max(np.abs(g[k] - exact[k])) <= 1e-6


@pytest.mark.parametrize("a", ANISO)
def test_laplacian_paths_agree(a):
    fr = frame(a)
    f = lambda x, y, z: np.sin(x * y) + z**3 * x
    lap = scalar_laplacian(f, fr)(*PTS)
    assert np.max(np.abs(lap - div_alpha(grad_alpha(f, fr), fr)(*PTS))) <= 1e-6
    assert np.max(np.abs(lap - laplace_beltrami(f, fr)(*PTS))) <= 1e-6


def test_vector_laplacian_commutes_with_grad():
    a = ANISO[0]
    fr = LameFrame(MultiIndex(a), FiniteDifference(step=2e-2, richardson=2))
    X1, X2, X3 = X(a[0]), X(a[1]), X(a[2])
    f = lambda x, y, z: X1(x) ** 3 * X2(y) + X3(z) ** 2 * X1(x)
    lhs = vector_laplacian(grad_alpha(f, fr), fr)(*PTS)
    rhs = grad_alpha(scalar_laplacian(f, fr), fr)(*PTS)
    assert np.max(np.abs(lhs - rhs)) <= 1e-5


def test_grid_operators_exact_on_effective_quadratics():
    a = (0.7, 1.2, 0.9)
    grid = GridSpec(((0.2, 2.0), (0.3, 1.5), (0.5, 2.5)), (9, 11, 10), a)
    X1, X2, X3 = X(a[0]), X(a[1]), X(a[2])
    vals = grid.sample(lambda x, y, z: X1(x) ** 2 + X2(y) ** 2 + X3(z) ** 2)
    np.testing.assert_allclose(diffops.grid_laplacian(vals, grid), 6.0, atol=1e-9)
    u = np.stack([grid.sample(lambda x, y, z: X2(y) * X3(z) + 0 * x), grid.sample(lambda x, y, z: X1(x) * X3(z) + 0 * y),
                  grid.sample(lambda x, y, z: X1(x) * X2(y) + 0 * z)])
    np.testing.assert_allclose(diffops.grid_curl(u, grid), 0.0, atol=1e-9)
    np.testing.assert_allclose(diffops.grid_divergence(u, grid), 0.0, atol=1e-9)


def test_grid_physical_spacing_converges_second_order():
    a = (0.8, 1.0, 1.0)
    X1 = X(a[0])
    f = lambda x, y, z: np.sin(X1(x)) + 0 * y + 0 * z
    errs = []
    for n in (21, 41, 81):
        grid = GridSpec(((0.5, 2.0), (0, 1), (0, 1)), (n, 3, 3), a, spacing=diffops.UNIFORM_PHYSICAL)
        d = diffops.grid_partial(grid.sample(f), 0, grid)
        x = grid.axis(0)[0]
        errs.append(np.max(np.abs(d[:, 1, 1] - np.cos(X1(x)))))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_grid_validation():
    with pytest.raises(DomainError):
        GridSpec(((0.0, 1.0), (0.1, 1), (0.1, 1)), (5, 5, 5), (0.5, 1, 1))
    with pytest.raises(ValidationError):
        GridSpec(((0.1, 1.0), (0.1, 1), (0.1, 1)), (2, 5, 5), (0.5, 1, 1))
