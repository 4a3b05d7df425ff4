import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnek.qspecial import QBase
from qnek.series import IncompatibleSeries, TruncatedSeries, combine, compare, qshift

B = QBase(0.37 + 0.11j)

coeff = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2))


def series(order=None):
    orders = st.just(order) if order is not None else st.integers(0, 10)
    return orders.flatmap(lambda n: st.lists(coeff, min_size=n + 1, max_size=n + 1)).map(
        lambda c: TruncatedSeries(0.3 - 0.2j, c))


def test_qshift_examples():
    c = TruncatedSeries.constant(2.5)
    assert qshift(c, B).coeffs[0] == 2.5
    x = TruncatedSeries(0, [0, 1])
    assert np.allclose(qshift(x, B).coeffs, [0, B.q], rtol=1e-15, atol=0)
    th = 0.4 + 0.1j
    s = qshift(TruncatedSeries(th, [1]), B)
    assert s.prefactor_exponent == th
    assert abs(s.coeffs[0] - B.power(th)) < 1e-15


def test_combine_examples():
    a = TruncatedSeries(0, [1, 1])
    b = TruncatedSeries(0, [1, -1])
    assert np.array_equal((a + b).coeffs, [2, 0])
    prod = combine(TruncatedSeries(0, [1, 1, 0]), TruncatedSeries(0, [1, -1, 0]), "mul")
    assert np.array_equal(prod.coeffs, [1, 0, -1])
    assert not np.any(combine(a, None, "scalar_mul", 0).coeffs)


def test_integer_offset_is_absorbed():
    a = TruncatedSeries(0.5, [1, 2, 3])
    b = TruncatedSeries(1.5, [10, 20, 30])
    s = a + b
    assert s.prefactor_exponent == 0.5
    assert np.array_equal(s.coeffs, [1, 12, 23])


def test_incompatible_exponents_rejected():
    with pytest.raises(IncompatibleSeries):
        TruncatedSeries(0.5, [1]) + TruncatedSeries(0.25, [1])


def test_compare_examples():
    a = TruncatedSeries(0, [1, 2, 3])
    r = compare(a, a, 1e-9)
    assert r.passed and r.residual == 0
    assert not compare(a, TruncatedSeries(0, [1, 3, 3]), 1e-9).passed
    assert compare(a, TruncatedSeries(0, [1, 2 + 1e-14, 3]), 1e-9).passed
    with pytest.raises(IncompatibleSeries):
        compare(a, TruncatedSeries(0, [1, 2]), 1e-9)


def test_evaluation_uses_given_branch():
    s = TruncatedSeries(0.5, [1])
    assert abs(s(-1, log_x=1j * np.pi) - 1j) < 1e-15
    assert abs(s(-1, log_x=-1j * np.pi) + 1j) < 1e-15


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_qshift_is_linear(data):
    n = data.draw(st.integers(0, 10))
    a, b = data.draw(series(n)), data.draw(series(n))
    lhs = qshift(a + b, B).coeffs
    rhs = (qshift(a, B) + qshift(b, B)).coeffs
    assert np.allclose(lhs, rhs, rtol=1e-15, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(a=series(), b=series())
def test_qshift_is_multiplicative(a, b):
    lhs = qshift(combine(a, b, "mul"), B).coeffs
    rhs = combine(qshift(a, B), qshift(b, B), "mul").coeffs
    scale = max(1.0, np.max(np.abs(lhs)))
    assert np.max(np.abs(lhs - rhs)) / scale < 1e-13
