import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathinv.families import (
    ConstantStrictData,
    Su2Structure,
    TightTorusStructure,
    heisenberg_model,
    su2_invariants,
    tight_torus_invariants,
    tight_torus_numeric_mu,
)
from pathinv.grid import GridSpec

reals = st.floats(-3, 3, allow_nan=False)


def test_tight_torus_examples():
    r = tight_torus_invariants(TightTorusStructure(3))
    assert r["flat"] and r["mu"] == 0.0
    assert tight_torus_invariants(TightTorusStructure(1, 1, 1, 0, 1))["mu"] == pytest.approx(3 / (8 * math.pi))
    assert tight_torus_invariants(TightTorusStructure(2, 2, 1, 1, 1))["mu"] == pytest.approx(3 / (4 * math.pi))
    t = TightTorusStructure(1, 1, 2, 0, 1)
    assert tight_torus_numeric_mu(t) == pytest.approx(3 / (2 * math.pi), rel=1e-14)


def test_tight_torus_enriched_data():
    t = TightTorusStructure(1, 0.5, 1.5, -1.0, -1.0)
    e = tight_torus_invariants(t)["enriched"]
    assert e["tau12"] == -1.5 ** 2 and e["tau21"] == -1.0
    assert e["S"] == pytest.approx(t.bf / 3)
    r = tight_torus_invariants(t)
    assert r["Q1"] == pytest.approx(1.5 * 1.5 ** 3 * -1.0)
    assert r["Q2"] == pytest.approx(-1.5 * 1.5 * -1.0)


def test_tight_torus_validation():
    with pytest.raises(ValueError):
        TightTorusStructure(0)
    with pytest.raises(ValueError):
        TightTorusStructure(1, 1, 1, 1, 1)


@given(st.integers(-3, 3).filter(bool), reals, reals)
def test_tight_torus_routes_agree(n, a, b):
    if abs(a) < 0.1:
        return
    t = TightTorusStructure(n, a, b, 0.0, 1.0 / a)
    exact = tight_torus_invariants(t)["mu"]
    tol = 1e-10 * abs(exact) + 1e-12
    assert abs(tight_torus_numeric_mu(t) - exact) <= tol
    assert abs(tight_torus_numeric_mu(t, GridSpec(8, 8, 8)) - exact) <= tol
    # gauge: only (n, bf) matters
    other = TightTorusStructure(n, 1.0, t.bf, 0.0, 1.0)
    assert abs(tight_torus_numeric_mu(other) - exact) <= tol


def test_su2_examples():
    r = su2_invariants(Su2Structure())
    assert r["x"] == 0 and r["mu"] == -0.5 and r["flat"]
    r = su2_invariants(Su2Structure(1, 0, 1, 1))
    assert (r["x"], r["y"], r["z"]) == (1, -1, 2)
    assert r["mu"] == -7 / 8
    assert r["mu_numeric"] == pytest.approx(-7 / 8, abs=1e-12)
    # section values of the curvature, read off the structure equations
    assert r["Q1"] == 1.5 and r["Q2"] == -3.0
    with pytest.raises(ValueError):
        Su2Structure(1, 1, 1, 1)


@given(reals, reals, reals)
def test_su2_identities(r1, r2, s1):
    if abs(r1) < 0.1:
        return
    u = Su2Structure(r1, r2, s1, (1 + r2 * s1) / r1)
    assert u.x ** 2 + u.y * u.z == pytest.approx(-1, abs=1e-9 * (1 + u.z * abs(u.y)))
    r = su2_invariants(u)
    assert abs(r["mu"] - r["mu_numeric"]) <= 1e-12 * max(1.0, abs(r["mu"]))
    assert r["mu"] <= -0.5


def test_constant_data_transgression_matches_pi3():
    for d in (ConstantStrictData(-1, -1, 1 / 3), ConstantStrictData(2, -0.5, 0.7), ConstantStrictData(0, 0, 0)):
        assert d.transgression_integrand() == pytest.approx(d.pi3_integrand(), abs=1e-12)
        assert d.pi3_integrand() == pytest.approx(2 * d.tau12 * d.tau21 - 4.5 * d.w0 ** 2, abs=1e-12)


def test_heisenberg():
    h = heisenberg_model()
    assert h["enriched"]["tau12"] == 0 and h["enriched"]["tau21"] == 0
    assert h["Q1"] == 0 and h["Q2"] == 0 and h["mu"] == 0 and h["flat"]
