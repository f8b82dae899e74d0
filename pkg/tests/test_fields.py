import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_gegenbauer, eval_genlaguerre, eval_hermite

from fpsolve import REAL_LINE, Interval, ScalarField
from fpsolve.errors import EvalAtSingularity
from fpsolve.fields import constant_field, sample_grid
from fpsolve.integration import QuadratureFailed, integrate
from fpsolve.polynomials import gegenbauer, hermite_normalized, laguerre, top


def test_interval_basics():
    iv = Interval(0.0, 2.0)
    assert iv.width == 2.0 and iv.is_finite
    assert list(iv.contains([0.0, 1.0, 2.0])) == [False, True, False]
    assert list(iv.contains([0.0, 2.0], closed=True)) == [True, True]
    assert iv.intersect(Interval(1.0, 5.0)) == Interval(1.0, 2.0)
    assert REAL_LINE.contains_interval(iv) and not iv.contains_interval(REAL_LINE)
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)


@pytest.mark.parametrize("iv", [REAL_LINE, Interval(0, math.inf), Interval(-math.inf, 3.5), Interval(-1, 2)])
def test_interval_json(iv):
    assert Interval.from_json(iv.to_json()) == iv


def test_finite_part():
    assert REAL_LINE.finite_part() == Interval(-10, 10)
    assert Interval(2, math.inf).finite_part(5) == Interval(2, 12)
    assert Interval(-math.inf, 0).finite_part(5) == Interval(-10, 0)


def test_field_poles_and_derivatives():
    f = ScalarField(REAL_LINE, lambda x: 1 / x, lambda x: -1 / x ** 2, poles=(0.0,))
    with pytest.raises(EvalAtSingularity):
        f(np.array([0.0, 1.0]))
    assert f.d1(np.array(2.0)) == -0.25
    with pytest.raises(NotImplementedError):
        f.d2(np.array(1.0))
    c = constant_field(3.0)
    assert np.all(c(np.arange(4.0)) == 3.0) and np.all(c.d2(np.arange(4.0)) == 0.0)


def test_sample_grid_margins():
    x = sample_grid(Interval(0, 1), poles=(0.5,), n_points=1001, margin=1e-3)
    assert x[0] == pytest.approx(1e-3) and x[-1] == pytest.approx(1 - 1e-3)
    assert np.min(np.abs(x - 0.5)) > 1e-3


@given(n=st.integers(0, 25), x=st.floats(-6, 6))
def test_hermite_recurrence(n, x):
    seq = hermite_normalized(n, x)
    ref = eval_hermite(n, x) / math.sqrt(2.0 ** n * math.factorial(n))
    assert float(seq[n]) == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(1.0, abs(ref)))


@given(n=st.integers(0, 15), a=st.floats(0.5, 8), t=st.floats(-1, 1))
def test_gegenbauer_recurrence(n, a, t):
    ref = eval_gegenbauer(n, a, t)
    assert float(gegenbauer(n, a, t)[n]) == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(1.0, abs(ref)))


@given(n=st.integers(0, 15), a=st.floats(0.1, 12), z=st.floats(0, 30))
def test_laguerre_recurrence(n, a, z):
    ref = eval_genlaguerre(n, a, z)
    assert float(laguerre(n, a, z)[n]) == pytest.approx(ref, rel=1e-8, abs=1e-8 * max(1.0, abs(ref)))


def test_negative_degree_vanishes():
    seq = hermite_normalized(2, np.linspace(0, 1, 5))
    assert np.all(top(seq, -1) == 0.0)


def test_integrate_infinite_domains():
    assert integrate(lambda x: math.exp(-x * x), REAL_LINE) == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    assert integrate(lambda x: math.exp(-x), Interval(0, math.inf)) == pytest.approx(1.0, abs=1e-10)
    wide = integrate(lambda x: math.exp(-((x - 40) / 3) ** 2), REAL_LINE, scale=10, center=40)
    assert wide == pytest.approx(3 * math.sqrt(math.pi), rel=1e-9)


def test_integrate_reports_failure():
    with pytest.raises(QuadratureFailed):
        integrate(lambda x: 1.0, REAL_LINE)
    with pytest.raises(QuadratureFailed):
        integrate(lambda x: math.nan, Interval(0, 1))
