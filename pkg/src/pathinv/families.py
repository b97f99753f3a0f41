"""Homogeneous structures with constant structure functions.

A strict structure whose torsion and curvature functions are constant is fixed
by three numbers at the section ``a1 = a2 = 1``: the torsions ``tau12``,
``tau21`` and ``w0``, the theta-component of ``w`` (which equals ``S``).
:class:`ConstantStrictData` derives the rest of the chain from them and feeds
the same evaluators used for ODE structures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .forms import Form1, transgression3
from .grid import GridSpec, PeriodicScalarField, integrate_volume
from .ode import connection_from_data, pi3_density

# Oriented volume of SU(2) for the coframe theta^theta1^theta2 built from the
# left-invariant forms; gamma^beta^alpha has volume 2 pi^2 and the coframe orders it oppositely.
SU2_VOLUME = -2.0 * math.pi ** 2

_TOL = 1e-12


@dataclass(frozen=True)
class ConstantStrictData:
    tau12: float
    tau21: float
    w0: float

    @property
    def S(self) -> float:
        return self.w0

    @property
    def m(self) -> float:
        return -self.S / 4.0

    @property
    def q(self) -> float:
        return -self.tau12 * self.tau21 + 9.0 / 16.0 * self.S ** 2

    @property
    def tau120(self) -> float:
        return -6.0 * self.tau12 * self.w0

    @property
    def tau210(self) -> float:
        return 6.0 * self.tau21 * self.w0

    @property
    def Q1(self) -> float:
        # tau120 + (3/2) S tau12 - n2 with n = 0
        return self.tau120 + 1.5 * self.S * self.tau12

    @property
    def Q2(self) -> float:
        # -P1 - (3/2) S tau21 + tau210 with P = 0
        return -1.5 * self.S * self.tau21 + self.tau210

    def pi3_integrand(self) -> float:
        """``8 pi^2 s^* TC_2`` through the generic strict-structure density."""
        w = Form1(self.w0, 0.0, 0.0)
        dens = pi3_density(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, self.S, self.tau12, self.tau21, w)
        return float(dens.c012)

    def connection(self, spec: GridSpec | None = None):
        """The pulled-back connection; constant fields on ``spec`` if given."""
        if spec is None:
            lift = float
        else:
            def lift(v):
                return PeriodicScalarField.constant(spec, v)
        return connection_from_data(
            Form1(lift(self.w0), lift(0.0), lift(0.0)),
            lift(self.m), lift(0.0), lift(0.0), lift(self.q), lift(self.tau12), lift(self.tau21),
        )

    def transgression_integrand(self) -> float:
        """``8 pi^2`` times the transgression coefficient of :meth:`connection`."""
        return float(transgression3(self.connection()).c012) * 8.0 * math.pi ** 2

    def enriched(self) -> dict:
        return {
            "tau12": self.tau12, "tau21": self.tau21, "S": self.S, "C": 0.0, "D": 0.0,
            "m": self.m, "q": self.q, "tau120": self.tau120, "tau210": self.tau210,
        }


@dataclass(frozen=True)
class TightTorusStructure:
    """The structure on ``T^3_n`` twisted by the constant matrix ``[[a, b], [c, f]]``."""

    n: int
    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    f: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n == 0:
            raise ValueError(f"winding n must be a nonzero integer, got {self.n!r}")
        det = self.a * self.f - self.b * self.c
        if abs(det - 1.0) > _TOL:
            raise ValueError(f"a*f - b*c must equal 1, got {det!r}")

    @property
    def bf(self) -> float:
        return self.b * self.f

    @property
    def data(self) -> ConstantStrictData:
        return ConstantStrictData(-self.b ** 2, -self.f ** 2, self.bf / 3.0)

    @property
    def volume(self) -> float:
        return 2.0 * math.pi * self.n


def tight_torus_invariants(t: TightTorusStructure) -> dict:
    mu = 3.0 * t.n / (8.0 * math.pi) * t.bf ** 2
    return {
        "kind": "tight-torus",
        "parameters": {"n": int(t.n), "a": t.a, "b": t.b, "c": t.c, "f": t.f},
        "Q1": 1.5 * t.b ** 3 * t.f,
        "Q2": -1.5 * t.b * t.f ** 3,
        "mu": mu,
        "flat": t.bf == 0.0,
        "enriched": t.data.enriched(),
    }


def tight_torus_numeric_mu(t: TightTorusStructure, grid: GridSpec | None = None) -> float:
    """``mu`` from the constant strict-structure density times ``int theta^theta1^theta2 = 2 pi n``.

    With ``grid`` the constant connection is instead sampled on the grid and
    pushed through the full transgression engine.
    """
    if grid is None:
        return t.data.pi3_integrand() / (8.0 * math.pi ** 2) * t.volume
    field = transgression3(t.data.connection(grid)).c012
    return integrate_volume(field) / grid.volume * t.volume


@dataclass(frozen=True)
class Su2Structure:
    r1: float = 1.0
    r2: float = 0.0
    s1: float = 0.0
    s2: float = 1.0

    def __post_init__(self):
        det = self.r1 * self.s2 - self.r2 * self.s1
        if abs(det - 1.0) > _TOL:
            raise ValueError(f"r1*s2 - r2*s1 must equal 1, got {det!r}")

    @property
    def x(self) -> float:
        return self.r1 * self.s1 + self.r2 * self.s2

    @property
    def y(self) -> float:
        return -(self.r1 ** 2 + self.r2 ** 2)

    @property
    def z(self) -> float:
        return self.s1 ** 2 + self.s2 ** 2

    @property
    def data(self) -> ConstantStrictData:
        return ConstantStrictData(self.y, -self.z, self.x / 3.0)


def su2_numeric_mu(u: Su2Structure) -> float:
    return u.data.pi3_integrand() / (8.0 * math.pi ** 2) * SU2_VOLUME


def su2_invariants(u: Su2Structure) -> dict:
    x, y, z = u.x, u.y, u.z
    return {
        "kind": "su2",
        "parameters": {"r1": u.r1, "r2": u.r2, "s1": u.s1, "s2": u.s2},
        "x": x, "y": y, "z": z,
        "Q1": -1.5 * x * y,
        "Q2": -1.5 * x * z,
        "mu": -0.5 - 0.375 * x * x,
        "mu_numeric": su2_numeric_mu(u),
        "volume": SU2_VOLUME,
        "flat": abs(x) <= _TOL,
        "enriched": u.data.enriched(),
    }


def heisenberg_model() -> dict:
    d = ConstantStrictData(0.0, 0.0, 0.0)
    return {
        "kind": "heisenberg",
        "parameters": {},
        "Q1": d.Q1,
        "Q2": d.Q2,
        "mu": d.pi3_integrand() / (8.0 * math.pi ** 2),
        "flat": True,
        "enriched": d.enriched(),
    }
