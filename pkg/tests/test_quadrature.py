import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trapnoise.quadrature import QuadratureError, integrate


def test_polynomial_exact():
    res = integrate(lambda x: np.stack([x**5, np.ones_like(x)], axis=-1), [0.0, 2.0])
    assert res.value == pytest.approx([64 / 6, 2.0], rel=1e-14)


def test_oscillatory_integral():
    res = integrate(lambda x: np.cos(50 * x), [0.0, 1.0], rtol=1e-12)
    assert res.value[0] == pytest.approx(math.sin(50) / 50, rel=1e-11)


def test_sqrt_endpoint_singularity_converges():
    res = integrate(lambda x: 1 / np.sqrt(x), [0.0, 1.0], rtol=1e-8)
    assert res.value[0] == pytest.approx(2.0, rel=1e-7)


def test_components_share_subdivision_but_meet_own_tolerance():
    # a tiny smooth component next to a peaked one
    def f(x):
        return np.stack([1e-12 * np.exp(x), 1 / (1e-4 + (x - 0.3) ** 2)], axis=-1)

    res = integrate(f, [0.0, 1.0], rtol=1e-10)
    exact_peak = (math.atan(0.7 / 1e-2) + math.atan(0.3 / 1e-2)) / 1e-2
    assert res.value[0] == pytest.approx(1e-12 * (math.e - 1), rel=1e-10)
    assert res.value[1] == pytest.approx(exact_peak, rel=1e-10)


def test_budget_exhaustion_carries_partial_estimate():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), [0.0, 1.0], rtol=1e-14, max_intervals=50)
    assert info.value.estimate is not None
    assert np.all(np.isfinite(info.value.estimate))


def test_bad_breakpoints():
    with pytest.raises(ValueError):
        integrate(np.sin, [1.0, 0.0])


def test_non_finite_integrand_raises():
    with pytest.raises(FloatingPointError):
        integrate(lambda x: np.full_like(x, np.nan), [0.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 20.0))
def test_error_estimate_is_honest(a):
    res = integrate(lambda x: np.exp(-a * x) * np.cos(x), [0.0, 5.0], rtol=1e-9)
    exact = (a + math.exp(-5 * a) * (math.sin(5) - a * math.cos(5))) / (1 + a * a)
    assert abs(res.value[0] - exact) <= max(res.error[0], 1e-9 * abs(exact)) * 10
