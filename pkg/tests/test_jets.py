import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathinv import jets

pts = st.floats(0.2, 1.5)


def d1(fn, u0, order=4):
    """Univariate derivatives 0..order of fn at u0."""
    t = jets.Jet.variable(1, order, 0, np.array(u0))
    out = fn(t)
    return [float(out.derivative((k,))) for k in range(order + 1)]


@given(pts)
def test_elementary_derivatives(u):
    assert d1(jets.sin, u) == pytest.approx([math.sin(u), math.cos(u), -math.sin(u), -math.cos(u), math.sin(u)])
    assert d1(jets.exp, u) == pytest.approx([math.exp(u)] * 5)
    assert d1(jets.log, u) == pytest.approx([math.log(u), 1 / u, -1 / u**2, 2 / u**3, -6 / u**4])
    assert d1(jets.sqrt, u)[:3] == pytest.approx([math.sqrt(u), 0.5 / math.sqrt(u), -0.25 * u ** -1.5])
    assert d1(jets.atan, u)[:3] == pytest.approx([math.atan(u), 1 / (1 + u * u), -2 * u / (1 + u * u) ** 2])
    tan = d1(jets.tan, u)
    sec2 = 1 / math.cos(u) ** 2
    assert tan[:3] == pytest.approx([math.tan(u), sec2, 2 * math.tan(u) * sec2])


def test_polynomial_is_exact():
    p = jets.Jet.variable(1, 4, 0, np.linspace(-4, 4, 9))
    g = 3 * p ** 3 - 2 * p ** 2 + p - 7
    assert np.all(g.derivative((4,)) == 0.0)
    assert np.array_equal((p ** 4).derivative((4,)), np.full(9, 24.0))


def test_mixed_partials():
    x, y = jets.seed(2, 3, (np.array(0.7), np.array(-0.4)))
    f = jets.sin(x * y) + x ** 2 * y
    # d^2/dxdy: cos(xy) - xy sin(xy) + 2x
    xv, yv = 0.7, -0.4
    expect = math.cos(xv * yv) - xv * yv * math.sin(xv * yv) + 2 * xv
    assert float(f.derivative((1, 1))) == pytest.approx(expect, rel=1e-14)
    assert float(f.partial(0).partial(1).value) == pytest.approx(expect, rel=1e-14)


def test_division_and_errors():
    x = jets.Jet.variable(1, 2, 0, np.array([1.0, 2.0]))
    r = 1.0 / x
    assert np.allclose(r.derivative((2,)), 2 / np.array([1.0, 2.0]) ** 3)
    with pytest.raises(ZeroDivisionError):
        jets.reciprocal(jets.Jet.variable(1, 2, 0, np.array([0.0])))
    with pytest.raises(ValueError):
        jets.power(jets.Jet.variable(1, 2, 0, np.array([-1.0])), 0.5)
    with pytest.raises(ValueError):
        x.derivative((3,))


def test_mixing_with_arrays_broadcasts():
    p = jets.Jet.variable(1, 2, 0, np.linspace(0, 1, 5).reshape(1, 5))
    x = np.arange(3.0).reshape(3, 1)
    g = x * p + x
    assert g.shape == (3, 5)
    assert np.array_equal(g.derivative((1,)), np.broadcast_to(x, (3, 5)))
