import math

import numpy as np
import pytest

from pathinv.charts import SpectralInterpolant
from pathinv.forms import THETA, THETA1, THETA2
from pathinv.grid import GridSpec, PeriodicScalarField, ResolutionError, frame_derivatives, integrate_volume
from pathinv.ode import (
    ALPHA_INDEPENDENT_CONSTANT,
    OdeTorusStructure,
    assemble_connection,
    curvature_chain,
    flatness_report,
    mu,
    mu_integrand_pointwise,
    mu_via_pi3,
    mu_via_transgression,
    q1,
    q2,
    q2_from_chain,
)

TWO_PI = 2.0 * math.pi


def amax(c):
    return c.max_abs() if isinstance(c, PeriodicScalarField) else abs(float(c))


def ode(spec, fn):
    return OdeTorusStructure.from_function(spec, fn)


def sample_F(x, y, a):
    return 0.3 * np.sin(TWO_PI * x) * np.cos(a) + 0.2 * np.cos(TWO_PI * y) * np.sin(2 * a) + 0.1


# frozen from an independent symbolic computation of the frame-derivative
# displays at (x, y, alpha) = (0.1, 0.2, 0.3)
FROZEN = {"Q2": -2.8563347986267633, "Q1": -0.06275793998751499,
          "C": 0.9913734468890733, "S": -0.20380124653197}
FROZEN_MU = -1.0 / (400.0 * math.pi)


@pytest.fixture(scope="module")
def sample(corpus_grid):
    s = ode(corpus_grid, sample_F)
    return s, curvature_chain(s)


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_point_values(sample, name):
    s, b = sample
    field = {"Q1": q1(s), "Q2": q2(s), "C": b.C, "S": b.S}[name]
    got = float(SpectralInterpolant(field)(0.1, 0.2, 0.3))
    assert got == pytest.approx(FROZEN[name], rel=1e-10, abs=1e-12)


def test_frozen_mu(sample):
    s, _ = sample
    assert mu(s) == pytest.approx(FROZEN_MU, rel=1e-12)
    assert mu_via_transgression(s) == pytest.approx(FROZEN_MU, rel=1e-9)
    assert mu_via_pi3(s) == pytest.approx(FROZEN_MU, rel=1e-9)
    assert integrate_volume(mu_integrand_pointwise(s).c012) == pytest.approx(FROZEN_MU, rel=1e-9)


def test_zero_structure(small_grid):
    s = ode(small_grid, lambda x, y, a: 0 * a)
    b = curvature_chain(s)
    for name, f in b.as_dict().items():
        if name == "tau12":
            assert np.all(f.samples == -1.0)
        else:
            assert f.max_abs() == 0.0, name
    assert mu(s) == 0.0 and mu_via_transgression(s) == 0.0
    pi = assemble_connection(s)
    for (i, j), basis in {(2, 0): THETA, (1, 0): THETA1, (2, 1): THETA2}.items():
        assert [amax(c) for c in (pi[i, j] - basis).coeffs()] == [0.0, 0.0, 0.0]
    assert amax(pi[0, 0].c0) == 0.0 and amax(pi[0, 2].c0) == 0.0
    r = flatness_report(s)
    assert r.flat and r.mu_zero and r.in_q1_kernel


@pytest.mark.parametrize("c", [0.5, 1.0, -0.7])
def test_constant_structure(small_grid, c):
    s = ode(small_grid, lambda x, y, a: c + 0 * a)
    b = curvature_chain(s)
    assert np.allclose(b.S.samples, -c / 3, atol=1e-14)
    assert np.allclose(b.tau21.samples, -c * c, atol=1e-14)
    assert np.allclose(b.tau120.samples, -2 * c, atol=1e-14)
    assert np.allclose(b.tau210.samples, 2 * c ** 3, atol=1e-14)
    assert b.C.max_abs() < 1e-14 and b.D.max_abs() < 1e-14
    assert np.allclose(q2(s).samples, 1.5 * c ** 3, atol=1e-13)
    assert np.allclose(q2_from_chain(b).samples, 1.5 * c ** 3, atol=1e-13)
    pi = assemble_connection(s, b)
    assert np.allclose(pi[0, 0].c0.samples, -c / 4, atol=1e-14)
    dens = mu_integrand_pointwise(s).c012.samples
    assert np.allclose(dens, 18 * c * c / 12 / (8 * math.pi ** 2), atol=1e-14)
    exact = ALPHA_INDEPENDENT_CONSTANT * c * c * TWO_PI / (8 * math.pi ** 2)
    assert exact == pytest.approx(3 * c * c / (8 * math.pi))
    assert mu(s) == pytest.approx(exact, rel=1e-12)
    assert mu_via_transgression(s) == pytest.approx(exact, rel=1e-9)


def test_sin_alpha_chain(small_grid):
    s = ode(small_grid, lambda x, y, a: np.sin(a) + 0 * x)
    b = curvature_chain(s)
    a = small_grid.mesh()[2]
    assert np.allclose(b.S.samples, -2 / 3 * np.sin(a), atol=1e-13)
    assert np.allclose(b.D.samples, 2 / 3 * np.cos(a), atol=1e-13)


def test_q1_cos2alpha(small_grid):
    s = ode(small_grid, lambda x, y, a: np.cos(2 * a) + 0 * x)
    assert (q1(s) - 2.5 * s.F).max_abs() <= 1e-10
    assert q1(s).max_abs() == pytest.approx(2.5)
    assert not flatness_report(s).q1_flat


def test_chain_identities(sample):
    s, b = sample
    # 2n = S2 + 4D, P = -S1/2 - 2C, m = -S/4, E = -S0/4
    assert (2 * b.n - b.S2 - 4 * b.D).max_abs() <= 1e-11
    assert (b.P + 0.5 * b.S1 + 2 * b.C).max_abs() <= 1e-11
    assert (b.m + 0.25 * b.S).max_abs() <= 1e-14
    assert (b.E + 0.25 * b.S0).max_abs() <= 1e-14
    d = frame_derivatives(b.S, s.F)
    for got, want in zip((b.S0, b.S1, b.S2), d):
        assert (got - want).max_abs() <= 1e-10


def test_connection_is_traceless(sample):
    s, b = sample
    assert max(amax(c) for c in assemble_connection(s, b).trace().coeffs()) <= 1e-13


def test_kernel_member_is_fully_flat(small_grid):
    # cos 3 alpha lies in the Q1 kernel, and with no (x, y) dependence Q2 vanishes too
    s = ode(small_grid, lambda x, y, a: 0.7 * np.cos(3 * a) + 0 * x)
    r = flatness_report(s)
    assert r.q1_flat and r.in_q1_kernel
    assert r.max_q2 <= 1e-12
    assert abs(r.mu) <= 1e-14


def test_kernel_mu_vanishes(corpus_grid):
    F = lambda x, y, a: np.sin(TWO_PI * x) * np.cos(a) + 0.4 * np.cos(TWO_PI * y) * np.sin(3 * a)
    s = ode(corpus_grid, F)
    assert q1(s).max_abs() <= 1e-9
    assert abs(mu(s)) <= 1e-12
    assert abs(mu_via_transgression(s)) <= 1e-9


def test_under_resolved_grid_raises():
    spec = GridSpec(16, 16, 32)
    s = ode(spec, lambda x, y, a: np.cos(2 * math.pi * 5 * x + 5 * a))
    with pytest.raises(ResolutionError):
        curvature_chain(s)
    with pytest.raises(ResolutionError):
        mu(s)


def test_from_expression_and_csv_source(tmp_path, small_grid):
    s = OdeTorusStructure.from_expression("0.3*sin(alpha)+0.1*cos(2*pi*x)*sin(3*alpha)", small_grid)
    ref = ode(small_grid, lambda x, y, a: 0.3 * np.sin(a) + 0.1 * np.cos(TWO_PI * x) * np.sin(3 * a))
    assert (s.F - ref.F).max_abs() <= 1e-15
    assert s.expression is not None
    F = PeriodicScalarField(small_grid, s.F.samples)
    assert OdeTorusStructure(F).spec == small_grid
