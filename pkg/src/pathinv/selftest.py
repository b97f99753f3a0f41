"""Quick oracle suite behind ``pathinv selftest``.

Each check returns ``(name, ok, detail)``.  The checks mirror the acceptance
suite on smaller samples so the whole run takes a few seconds.
"""

from __future__ import annotations

import math

import numpy as np

from . import forms
from .charts import PChartOde, alpha_to_p, q1_p
from .expr import parse, to_string
from .families import (
    Su2Structure,
    TightTorusStructure,
    su2_invariants,
    tight_torus_invariants,
    tight_torus_numeric_mu,
)
from .grid import GridSpec, PeriodicScalarField, check_resolution
from .ode import OdeTorusStructure, mu, mu_via_transgression, q1
from .oracles import property_harness, random_cubic_p, random_kernel

FAULTS = ("wedge12-sign",)


def _families():
    worst = 0.0
    for r, s in (((1.0, 0.0), (0.0, 1.0)), ((1.0, 0.0), (1.0, 1.0)), ((1.0, 0.0), (2.0, 1.0))):
        rep = su2_invariants(Su2Structure(*r, *s))
        worst = max(worst, abs(rep["mu"] - rep["mu_numeric"]))
    for n in (1, 2):
        for bf in (0.0, 1.0, 2.0):
            t = TightTorusStructure(n, 1.0, bf, 0.0, 1.0)
            exact = tight_torus_invariants(t)["mu"]
            grid = tight_torus_numeric_mu(t, GridSpec(8, 8, 8))
            worst = max(worst, abs(tight_torus_numeric_mu(t) - exact), abs(grid - exact))
    return worst <= 1e-12, worst


def _constant_structure(spec):
    worst = 0.0
    for c in (0.5, 1.0):
        s = OdeTorusStructure.from_function(spec, lambda x, y, a, c=c: c + 0.0 * a)
        exact = 3.0 * c * c / (8.0 * math.pi)
        worst = max(worst, abs(mu(s) - exact), abs(mu_via_transgression(s) - exact))
    return worst <= 1e-8, worst


def _spot_q1(spec):
    s = OdeTorusStructure.from_function(spec, lambda x, y, a: np.cos(2 * a) + 0.0 * x)
    err = (q1(s) - 2.5 * s.F).max_abs()
    return err <= 1e-10, err


def _charts(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(3):
        o = PChartOde.from_expression(random_cubic_p(rng))
        worst = max(worst, float(np.max(np.abs(q1_p(o)(*o.box.nodes())))))
    p4 = PChartOde.from_expression("p^4")
    p4_err = float(np.max(np.abs(q1_p(p4)(*p4.box.nodes()) + 4.0)))
    spec = GridSpec(16, 16, 32)
    F = PeriodicScalarField.from_function(spec, random_kernel(rng, bandwidth=2))
    pc = alpha_to_p(F)
    kern = float(np.max(np.abs(q1_p(pc)(*pc.box.nodes()))))
    ok = worst <= 1e-12 and p4_err == 0.0 and kern <= 1e-6
    return ok, {"cubic": worst, "p4": p4_err, "kernel": kern}


def _parser():
    corpus = ["0.3*sin(alpha)+0.1*cos(x)*sin(3*alpha)", "2^3^2", "-x^2/(1+y^2)", "atan(p)*sqrt(1+p^2)"]
    for src in corpus:
        ast = parse(src)
        if parse(to_string(ast)) != ast:
            return False, src
    return True, len(corpus)


def run(spec: GridSpec | None = None, seed: int = 42, size: int = 3, fault: str | None = None):
    """Run all checks; ``fault`` temporarily injects a known defect."""
    spec = spec or GridSpec(48, 48, 64)
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
    # fail fast if the grid cannot carry the corpus (bandwidth 5)
    probe = PeriodicScalarField.from_function(
        spec, lambda x, y, a: np.cos(2 * math.pi * 5 * (x + y) + 5 * a))
    check_resolution(probe)
    saved = forms._WEDGE12_SIGN
    if fault == "wedge12-sign":
        forms._WEDGE12_SIGN = -saved
    try:
        results = []
        ok, d = _families()
        results.append(("families", ok, d))
        ok, d = _constant_structure(spec)
        results.append(("constant-structure", ok, d))
        ok, d = _spot_q1(spec)
        results.append(("q1-spot-value", ok, d))
        summary = property_harness(seed, size, spec)
        for name, r in summary.results.items():
            detail = r["failed"][0] if r["failed"] else r["passed"]
            results.append((name, not r["failed"], detail))
        ok, d = _charts(seed)
        results.append(("p-chart", ok, d))
        ok, d = _parser()
        results.append(("parser", ok, d))
        return results
    finally:
        forms._WEDGE12_SIGN = saved
