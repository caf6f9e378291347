import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdim import poisson
from fracdim.errors import DomainError, GridTooCoarse, SingularBoundarySystem, ValidationError
from fracdim.poisson import NEWS, K2, PoissonProblem

SOURCES = {"1": lambda x: np.ones_like(x), "x": lambda x: x, "sin": np.sin}


def test_homogeneous_basis_examples():
    h1, h2 = poisson.poisson_homogeneous_basis(NEWS, 1.0)
    x = np.linspace(0.2, 3, 9)
    np.testing.assert_allclose(h1(x), 1.0)
    np.testing.assert_allclose(h2(x), x)
    h1, h2 = poisson.poisson_homogeneous_basis(K2, 1.0)
    np.testing.assert_allclose(h1(x), x)
    np.testing.assert_allclose(h2(x), 1.0)
    h1, h2 = poisson.poisson_homogeneous_basis(NEWS, 0.5)
    np.testing.assert_allclose(h2(x), x**0.5)


@given(st.sampled_from(poisson.OPERATORS), st.floats(0.2, 2.5))
def test_homogeneous_basis_residual(op, a):
    x = np.linspace(0.1, 2.0, 50)
    for h in poisson.poisson_homogeneous_basis(op, a):
        A, B, C = poisson.operator_coefficients(op, a, x)
        r = A * h.derivative(2)(x) + B * h.derivative(1)(x) + C * h(x)
        assert np.max(np.abs(r)) <= 1e-8
        # the finite-difference path sees the same thing
        assert np.max(np.abs(poisson.apply_operator(op, a, h, x))) <= 1e-6
    assert np.all(np.abs(poisson.wronskian(op, a, x)) > 0)


def test_classical_news_solution():
    sol = poisson.poisson_solve_analytic(PoissonProblem(NEWS, 1.0, SOURCES["1"], (0.5, 1.5), (0, 0)))
    x = np.linspace(0.5, 1.5, 33)
    np.testing.assert_allclose(sol(x), 0.5 * (x - 0.5) * (x - 1.5), atol=1e-12)
    assert sol.residual_norm <= 1e-10


@pytest.mark.parametrize("op,f", [(NEWS, "1"), (K2, "x")])
def test_analytic_matches_numeric(op, f):
    pr = PoissonProblem(op, 0.8, SOURCES[f], (0.1, 2.0), (0, 0))
    an = poisson.poisson_solve_analytic(pr)
    nu = poisson.poisson_solve_numeric(pr, nodes=2001)
    assert an.residual_norm <= 1e-6
    x = np.linspace(0.1, 2.0, 301)
    assert np.max(np.abs(an(x) - nu(x))) <= 1e-5


def test_numeric_linear_is_exact():
    pr = PoissonProblem(NEWS, 1.0, lambda x: 0 * x, (0.3, 1.7), (0.0, 1.0))
    sol = poisson.poisson_solve_numeric(pr, nodes=41)
    x = np.linspace(0.3, 1.7, 57)
    np.testing.assert_allclose(sol(x), (x - 0.3) / 1.4, atol=1e-13)
    assert sol.constants is None


@pytest.mark.parametrize("op", poisson.OPERATORS)
def test_numeric_second_order(op):
    pr = PoissonProblem(op, 0.7, np.sin, (0.2, 2.0), (0.1, -0.3))
    exact = poisson.poisson_solve_analytic(pr)
    errs = []
    for n in (41, 81, 161):
        s, v = (poisson._fd_news if op == NEWS else poisson._fd_k2)(pr, n)
        x = poisson.inverse_effective_x(0.7, s) if op == NEWS else s
        errs.append(np.max(np.abs(v[1:-1] - exact(x[1:-1]))))
    assert 3.5 <= errs[0] / errs[1] <= 4.5
    assert 3.5 <= errs[1] / errs[2] <= 4.5


@settings(max_examples=12)
@given(st.sampled_from(poisson.OPERATORS), st.floats(0.4, 1.5), st.sampled_from(sorted(SOURCES)),
       st.sampled_from(["analytic", "numeric"]))
def test_fresh_grid_residual(op, a, f, method):
    pr = PoissonProblem(op, a, SOURCES[f], (0.1, 2.0), (0.2, 0.0))
    solve = poisson.poisson_solve_analytic if method == "analytic" else poisson.poisson_solve_numeric
    sol = solve(pr)
    fresh = np.linspace(0.1, 2.0, 500)[1:-1] + 1e-4
    assert sol.residual_on(fresh) <= 2 * sol.residual_norm


@pytest.mark.parametrize("op,a,f", [(K2, 1.25, "sin"), (K2, 0.4, "1"), (NEWS, 1.5, "sin"), (NEWS, 0.4, "x")])
def test_recorded_residual_covers_the_ends(op, a, f):
    # the first and last solver panels are where interpolation is weakest
    pr = PoissonProblem(op, a, SOURCES[f], (0.1, 2.0), (0.2, 0.0))
    for sol in (poisson.poisson_solve_numeric(pr), poisson.poisson_solve_analytic(pr)):
        ends = np.concatenate([np.linspace(0.1, 0.11, 400), np.linspace(1.99, 2.0, 400)])
        assert sol.residual_on(ends) <= 2 * sol.residual_norm


def test_constants_mode():
    pr = PoissonProblem(K2, 0.6, SOURCES["x"], (0.2, 1.5), bc=None, constants=(1.5, -0.5))
    sol = poisson.poisson_solve_analytic(pr)
    assert sol.constants == (1.5, -0.5)
    assert sol.residual_norm <= 1e-6
    with pytest.raises(ValidationError):
        poisson.poisson_solve_numeric(pr)


def test_literal_particular_forms():
    for a in (0.5, 0.8, 1.3):
        chk = poisson.paper_particular_solution(NEWS, a, np.sin)
        assert not chk.discrepancy and chk.residual_norm <= 1e-6
    # the displayed K2 form carries a wrong exponent; it only works at alpha = 1
    chk = poisson.paper_particular_solution(K2, 0.8, SOURCES["x"])
    assert chk.discrepancy and "does not solve" in chk.note
    assert not poisson.paper_particular_solution(K2, 1.0, SOURCES["x"]).discrepancy


def test_problem_validation():
    with pytest.raises(DomainError):
        PoissonProblem(NEWS, 0.8, np.sin, (0.0, 1.0))
    with pytest.raises(ValidationError):
        PoissonProblem(NEWS, 0.8, np.sin, (1.0, 0.5))
    with pytest.raises(ValidationError):
        PoissonProblem(NEWS, 0.8, np.sin, (0.1, 1.0), bc=(0, 0), constants=(1, 1))
    with pytest.raises(ValidationError):
        PoissonProblem("ps", 0.8, np.sin)
    with pytest.raises(DomainError):
        poisson.apply_operator(NEWS, 0.8, np.sin, np.array([0.0, 1.0]))


def test_singular_boundary_system():
    pr = PoissonProblem(NEWS, 0.8, np.sin, (1.0, 1.0 + 1e-14), (0, 0))
    with pytest.raises(SingularBoundarySystem) as info:
        poisson.poisson_solve_analytic(pr)
    assert info.value.condition >= poisson.SINGULAR_CONDITION


def test_grid_too_coarse():
    pr = PoissonProblem(K2, 0.5, lambda x: np.sin(40 * x), (0.1, 2.0), (0, 0))
    with pytest.raises(GridTooCoarse):
        poisson.poisson_solve_numeric(pr, nodes=3)
    with pytest.raises(GridTooCoarse):
        poisson.poisson_solve_numeric(pr, nodes=9)
