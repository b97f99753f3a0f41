"""Exterior algebra of forms written in a fixed coframe ``(theta, theta1, theta2)``.

Coefficients may be plain numbers or :class:`~pathinv.grid.PeriodicScalarField`
instances; mixing the two broadcasts the constant.  Only what the transgression
form needs is implemented: 1-, 2- and 3-forms, the two wedge products between
them, and the cubic trace of a 3x3 matrix of 1-forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .grid import GridMismatchError, PeriodicScalarField

Coeff = Any  # float | PeriodicScalarField

# Sign applied to wedge12; only the selftest fault injection changes it.
_WEDGE12_SIGN = 1


def _check(*coeffs):
    spec = None
    for c in coeffs:
        if isinstance(c, PeriodicScalarField):
            if spec is None:
                spec = c.spec
            elif c.spec != spec:
                raise GridMismatchError(f"grid {spec} vs {c.spec}")
    return spec


@dataclass(frozen=True)
class Form1:
    c0: Coeff = 0.0
    c1: Coeff = 0.0
    c2: Coeff = 0.0

    def __post_init__(self):
        _check(self.c0, self.c1, self.c2)

    def __add__(self, o: "Form1") -> "Form1":
        return Form1(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)

    def __sub__(self, o: "Form1") -> "Form1":
        return Form1(self.c0 - o.c0, self.c1 - o.c1, self.c2 - o.c2)

    def __neg__(self):
        return Form1(-self.c0, -self.c1, -self.c2)

    def __mul__(self, k) -> "Form1":
        return Form1(self.c0 * k, self.c1 * k, self.c2 * k)

    __rmul__ = __mul__

    def coeffs(self):
        return (self.c0, self.c1, self.c2)


@dataclass(frozen=True)
class Form2:
    """Coefficients of ``theta^theta1``, ``theta^theta2`` and ``theta1^theta2``."""

    c01: Coeff = 0.0
    c02: Coeff = 0.0
    c12: Coeff = 0.0

    def __post_init__(self):
        _check(self.c01, self.c02, self.c12)

    def __add__(self, o: "Form2") -> "Form2":
        return Form2(self.c01 + o.c01, self.c02 + o.c02, self.c12 + o.c12)

    def __sub__(self, o: "Form2") -> "Form2":
        return Form2(self.c01 - o.c01, self.c02 - o.c02, self.c12 - o.c12)

    def __neg__(self):
        return Form2(-self.c01, -self.c02, -self.c12)

    def __mul__(self, k) -> "Form2":
        return Form2(self.c01 * k, self.c02 * k, self.c12 * k)

    __rmul__ = __mul__

    def coeffs(self):
        return (self.c01, self.c02, self.c12)


@dataclass(frozen=True)
class Form3:
    c012: Coeff = 0.0

    def __post_init__(self):
        _check(self.c012)

    def __add__(self, o: "Form3") -> "Form3":
        return Form3(self.c012 + o.c012)

    def __sub__(self, o: "Form3") -> "Form3":
        return Form3(self.c012 - o.c012)

    def __neg__(self):
        return Form3(-self.c012)

    def __mul__(self, k) -> "Form3":
        return Form3(self.c012 * k)

    __rmul__ = __mul__


THETA = Form1(1.0, 0.0, 0.0)
THETA1 = Form1(0.0, 1.0, 0.0)
THETA2 = Form1(0.0, 0.0, 1.0)
ZERO1 = Form1()


def wedge11(a: Form1, b: Form1) -> Form2:
    _check(*a.coeffs(), *b.coeffs())
    return Form2(
        a.c0 * b.c1 - a.c1 * b.c0,
        a.c0 * b.c2 - a.c2 * b.c0,
        a.c1 * b.c2 - a.c2 * b.c1,
    )


def wedge12(a: Form1, b: Form2) -> Form3:
    _check(*a.coeffs(), *b.coeffs())
    return Form3(_WEDGE12_SIGN * (a.c0 * b.c12 - a.c1 * b.c02 + a.c2 * b.c01))


class ConnectionMatrix:
    """A 3x3 matrix of :class:`Form1` entries."""

    def __init__(self, entries):
        rows = [list(r) for r in entries]
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("connection matrix must be 3x3")
        for r in rows:
            for e in r:
                if not isinstance(e, Form1):
                    raise TypeError(f"entries must be Form1, got {type(e).__name__}")
        _check(*(c for r in rows for e in r for c in e.coeffs()))
        self._rows = tuple(tuple(r) for r in rows)

    def __getitem__(self, ij) -> Form1:
        i, j = ij
        return self._rows[i][j]

    @property
    def rows(self):
        return self._rows

    def trace(self) -> Form1:
        return self[0, 0] + self[1, 1] + self[2, 2]

    def coefficient_matrix(self, k: int) -> list:
        """3x3 nested list of the ``theta^k`` coefficients."""
        return [[self[i, j].coeffs()[k] for j in range(3)] for i in range(3)]

    def conjugate(self, g) -> "ConnectionMatrix":
        """``g^{-1} pi g`` for a constant invertible 3x3 matrix ``g``."""
        g = np.asarray(g, dtype=float)
        gi = np.linalg.inv(g)
        out = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                acc = ZERO1
                for k in range(3):
                    for m in range(3):
                        w = gi[i, k] * g[m, j]
                        if w != 0.0:
                            acc = acc + self[k, m] * float(w)
                out[i][j] = acc
        return ConnectionMatrix(out)


def matrix_wedge(p: ConnectionMatrix, r: ConnectionMatrix):
    """``(p ^ r)_ik = sum_j p_ij ^ r_jk`` as a nested list of :class:`Form2`."""
    out = []
    for i in range(3):
        row = []
        for k in range(3):
            acc = wedge11(p[i, 0], r[0, k])
            for j in (1, 2):
                acc = acc + wedge11(p[i, j], r[j, k])
            row.append(acc)
        out.append(row)
    return out


def trace_cubed(pi: ConnectionMatrix) -> Form3:
    """``tr(pi ^ pi ^ pi)``."""
    pp = matrix_wedge(pi, pi)
    acc = Form3(0.0)
    for i in range(3):
        for k in range(3):
            # a 1-form and a 2-form commute
            acc = acc + wedge12(pi[k, i], pp[i][k])
    return acc


def transgression3(pi: ConnectionMatrix) -> Form3:
    """The transgression form ``tr(pi^pi^pi) / (24 pi^2)``."""
    return trace_cubed(pi) * (1.0 / (24.0 * math.pi ** 2))
