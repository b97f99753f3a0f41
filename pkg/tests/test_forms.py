import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathinv.forms import (
    THETA,
    THETA1,
    THETA2,
    ConnectionMatrix,
    Form1,
    Form2,
    transgression3,
    trace_cubed,
    wedge11,
    wedge12,
)
from pathinv.grid import GridMismatchError, GridSpec, PeriodicScalarField

reals = st.floats(-3, 3, allow_nan=False)
form1 = st.builds(Form1, reals, reals, reals)
SPEC = GridSpec(4, 4, 4)


def random_field(rng):
    return PeriodicScalarField(SPEC, rng.standard_normal(SPEC.shape))


def random_form1(rng):
    return Form1(random_field(rng), random_field(rng), random_field(rng))


def close(a, b, tol=1e-13):
    return all(np.max(np.abs(np.asarray(getattr(x, "samples", x)) - np.asarray(getattr(y, "samples", y)))) <= tol
               for x, y in zip(a.coeffs(), b.coeffs()))


def test_wedge11_examples():
    assert wedge11(THETA, THETA1).coeffs() == (1.0, 0.0, 0.0)
    a = Form1(0.3, -1.2, 2.0)
    assert wedge11(a, a).coeffs() == (0.0, 0.0, 0.0)
    assert wedge11(THETA + THETA1, THETA1 + THETA2).coeffs() == (1.0, 1.0, 1.0)


def test_wedge12_examples():
    assert wedge12(THETA, wedge11(THETA1, THETA2)).c012 == 1.0
    assert wedge12(THETA1, wedge11(THETA1, THETA2)).c012 == 0.0
    assert wedge12(THETA2 * 2.0, wedge11(THETA, THETA1)).c012 == 2.0


def test_grid_mismatch():
    f = PeriodicScalarField.constant(SPEC, 1.0)
    g = PeriodicScalarField.constant(GridSpec(6, 6, 6), 1.0)
    with pytest.raises(GridMismatchError):
        wedge11(Form1(f, 0.0, 0.0), Form1(g, 0.0, 0.0))
    with pytest.raises(GridMismatchError):
        Form1(f, g, 0.0)


@given(form1, form1, form1, reals)
def test_wedge11_bilinear_antisymmetric(a, b, c, k):
    assert close(wedge11(a, b), -wedge11(b, a))
    lhs = wedge11(a * k + c, b)
    rhs = wedge11(a, b) * k + wedge11(c, b)
    assert all(abs(x - y) <= 1e-12 * (1 + abs(x)) for x, y in zip(lhs.coeffs(), rhs.coeffs()))


def test_wedge11_fields_pointwise(rng):
    a, b, c = random_form1(rng), random_form1(rng), random_form1(rng)
    assert close(wedge11(a, b), -wedge11(b, a))
    assert close(wedge11(a + c, b), wedge11(a, b) + wedge11(c, b), 1e-13)


@given(form1, form1, form1)
def test_triple_wedge_alternating(a, b, c):
    v = wedge12(a, wedge11(b, c)).c012
    # determinant of the coefficient matrix
    det = float(np.linalg.det(np.array([a.coeffs(), b.coeffs(), c.coeffs()])))
    assert v == pytest.approx(det, abs=1e-10)
    assert wedge12(b, wedge11(a, c)).c012 == pytest.approx(-v, abs=1e-10)
    assert wedge12(a, wedge11(a, c)).c012 == pytest.approx(0.0, abs=1e-10)


def test_connection_matrix_validation():
    with pytest.raises(ValueError):
        ConnectionMatrix([[THETA] * 3] * 2)
    with pytest.raises(TypeError):
        ConnectionMatrix([[THETA, THETA, 1.0]] + [[THETA] * 3] * 2)


def model_connection():
    z = Form1()
    return ConnectionMatrix([[z, z, z], [THETA1, z, z], [THETA, THETA2, z]])


def test_transgression_of_model_is_zero():
    assert transgression3(model_connection()).c012 == 0.0


def _random_sl3(rng, fields=False):
    make = (lambda: random_form1(rng)) if fields else (lambda: Form1(*rng.standard_normal(3)))
    e = [[make() for _ in range(3)] for _ in range(3)]
    e[2][2] = -(e[0][0] + e[1][1])
    return ConnectionMatrix(e)


def test_trace_cubed_conjugation_invariant(rng):
    pi = _random_sl3(rng, fields=True)
    g = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    a = trace_cubed(pi).c012
    b = trace_cubed(pi.conjugate(g)).c012
    assert np.max(np.abs(a.samples - b.samples)) <= 1e-10 * max(1.0, a.max_abs())


@given(st.integers(0, 2**32 - 1), st.booleans())
@settings(max_examples=25)
def test_triangular_nilpotent_has_zero_transgression(seed, upper):
    rng = np.random.default_rng(seed)
    z = Form1()
    e = [[z] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            if (j > i) if upper else (j < i):
                e[i][j] = Form1(*rng.standard_normal(3))
    assert transgression3(ConnectionMatrix(e)).c012 == pytest.approx(0.0, abs=1e-12)


def test_transgression_normalisation():
    # tr(pi^3) for the diagonal-free cyclic pattern, checked against a hand expansion
    z = Form1()
    pi = ConnectionMatrix([[z, THETA, z], [z, z, THETA1], [THETA2, z, z]])
    # the three cyclic terms each give theta^theta1^theta2
    assert trace_cubed(pi).c012 == pytest.approx(3.0)
    assert transgression3(pi).c012 == pytest.approx(3.0 / (24 * math.pi ** 2))


def test_sl3_trace(rng):
    pi = _random_sl3(rng)
    assert all(abs(c) < 1e-15 for c in pi.trace().coeffs())


def test_form_arithmetic():
    a = Form2(1.0, 2.0, 3.0)
    assert (a - a).coeffs() == (0.0, 0.0, 0.0)
    assert (2 * a).coeffs() == (2.0, 4.0, 6.0)
    assert (-THETA).coeffs() == (-1.0, -0.0, -0.0)
