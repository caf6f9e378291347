import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdim.special import beta_half, gamma


@given(st.floats(0.01, 30.0))
def test_gamma_matches_mpmath(x):
    ref = float(mpmath.gamma(x))
    assert abs(gamma(x) - ref) <= 1e-13 * abs(ref)


@given(st.floats(-4.9, -0.01).filter(lambda x: abs(x - round(x)) > 1e-3))
def test_gamma_reflection_negative(x):
    ref = float(mpmath.gamma(x))
    assert abs(gamma(x) - ref) <= 1e-12 * abs(ref)


def test_gamma_special_values():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    for n in range(1, 12):
        assert gamma(n) == pytest.approx(math.factorial(n - 1), rel=1e-14)


def test_gamma_vectorised():
    x = np.array([0.3, 1.7, 4.2])
    np.testing.assert_allclose(gamma(x), [float(mpmath.gamma(v)) for v in x], rtol=1e-14)


@given(st.floats(0.1, 6.0), st.floats(0.1, 6.0))
def test_beta_half_matches_mpmath(mu, nu):
    ref = float(mpmath.beta(mu / 2, nu / 2))
    assert abs(beta_half(mu, nu) - ref) <= 1e-12 * ref
