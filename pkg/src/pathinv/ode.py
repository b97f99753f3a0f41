"""Path structures of second-order ODEs written on the 3-torus.

The structure is given by one periodic function ``F(x, y, alpha)`` through the
coframe ``theta2 = dalpha - F theta1``.  Everything here is evaluated at the
canonical section ``a1 = a2 = 1``.  Subscripts on ``F`` are frame derivatives
applied leftmost first: ``F_20`` is the frame-0 derivative of ``F_2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Optional

import numpy as np

from .forms import (
    THETA,
    THETA1,
    THETA2,
    ConnectionMatrix,
    Form1,
    Form2,
    Form3,
    transgression3,
    wedge12,
)
from .grid import (
    GridSpec,
    PeriodicScalarField,
    _trig,
    check_resolution,
    dalpha,
    dx,
    dy,
    frame_derivative,
    integrate_volume,
    resolved_bandwidth,
)

# Constant of the alpha-independent case: 8 pi^2 mu = C * int F^2.
ALPHA_INDEPENDENT_CONSTANT = 1.5
CONSTANT_NOTE = (
    "8*pi^2*mu = (3/2) * int F^2 dV for alpha-independent F; "
    "confirmed by the transgression route (the alternative 4/3 is not supported)"
)


@dataclass(frozen=True)
class OdeTorusStructure:
    """``theta2 = dalpha - F theta1`` on the torus.

    ``source`` optionally keeps a pointwise callable ``F(x, y, alpha)`` so that
    oracles can resample on other grids; ``expression`` keeps the text.
    """

    F: PeriodicScalarField
    source: Optional[Callable] = None
    expression: Optional[str] = None

    @classmethod
    def from_function(cls, spec: GridSpec, fn, expression=None) -> "OdeTorusStructure":
        return cls(PeriodicScalarField.from_function(spec, fn), fn, expression)

    @classmethod
    def from_expression(cls, text: str, spec: GridSpec, strict: bool = False) -> "OdeTorusStructure":
        from .expr import compile_function, evaluate_on_grid, parse

        ast = parse(text, chart="alpha")
        return cls(evaluate_on_grid(ast, spec, strict=strict), compile_function(ast), text)

    @property
    def spec(self) -> GridSpec:
        return self.F.spec


class _FrameJets:
    """Memoized iterated frame derivatives of ``F``."""

    def __init__(self, F: PeriodicScalarField):
        self.F = F
        self._memo = {(): F}

    def __call__(self, *idx) -> PeriodicScalarField:
        if idx not in self._memo:
            self._memo[idx] = frame_derivative(self(*idx[:-1]), self.F, idx[-1])
        return self._memo[idx]


@dataclass(frozen=True)
class EnrichedCurvatureBundle:
    tau12: PeriodicScalarField
    tau21: PeriodicScalarField
    A: PeriodicScalarField
    B: PeriodicScalarField
    C: PeriodicScalarField
    D: PeriodicScalarField
    S: PeriodicScalarField
    S0: PeriodicScalarField
    S1: PeriodicScalarField
    S2: PeriodicScalarField
    n: PeriodicScalarField
    P: PeriodicScalarField
    n0: PeriodicScalarField
    n1: PeriodicScalarField
    n2: PeriodicScalarField
    P0: PeriodicScalarField
    P1: PeriodicScalarField
    P2: PeriodicScalarField
    tau120: PeriodicScalarField
    tau210: PeriodicScalarField
    m: PeriodicScalarField
    E: PeriodicScalarField
    q: PeriodicScalarField
    Q1: PeriodicScalarField
    Q2: PeriodicScalarField
    w: Form1  # the 1-form w of the section, -(F theta + F_2 theta1)/3

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "w"}


def curvature_chain(s: OdeTorusStructure, check: bool = True) -> EnrichedCurvatureBundle:
    """The full coefficient chain at the section ``a1 = a2 = 1``."""
    F = s.F
    if check:
        check_resolution(F)
    spec = F.spec
    d = _FrameJets(F)
    F0, F1, F2 = d(0), d(1), d(2)
    F22, F222 = d(2, 2), d(2, 2, 2)

    C = (F1 - d(2, 0) + F * F2) / 3.0
    D = 2.0 * F2 / 3.0
    S = (F22 - F) / 3.0
    S0 = (d(2, 2, 0) - F0) / 3.0
    S1 = (d(2, 2, 1) - F1) / 3.0
    S2 = (F222 - F2) / 3.0

    # 2n = S_2 + 4D
    n = (F222 + 7.0 * F2) / 6.0
    n0 = (d(2, 2, 2, 0) + 7.0 * d(2, 0) + F * (F222 + 7.0 * F2)) / 6.0
    n1 = (d(2, 2, 2, 1) + 7.0 * d(2, 1) + F2 * (F222 + 7.0 * F2)) / 6.0
    n2 = (d(2, 2, 2, 2) + 7.0 * F22) / 6.0

    P = -S1 / 2.0 - 2.0 * C
    # dP + 3P(phi + w) = P0 theta + P1 theta1 + P2 theta2 with 3w = -F theta - F_2 theta1
    P0 = frame_derivative(P, F, 0) - P * F
    P1 = frame_derivative(P, F, 1) - P * F2
    P2 = frame_derivative(P, F, 2)

    tau12 = PeriodicScalarField.constant(spec, -1.0)
    tau21 = F0 - F * F
    tau120 = -2.0 * F
    tau210 = d(0, 0) - 4.0 * F * F0 + 2.0 * F ** 3

    m = -S / 4.0
    E = -S0 / 4.0
    q = -n1 - tau12 * tau21 + (9.0 / 16.0) * S * S - 3.0 * E

    Q1 = tau120 + 1.5 * S * tau12 - n2
    Q2 = -P1 - 1.5 * S * tau21 + tau210

    zero = PeriodicScalarField.constant(spec, 0.0)
    w = Form1(-F / 3.0, -F2 / 3.0, 0.0)
    return EnrichedCurvatureBundle(
        tau12=tau12, tau21=tau21, A=zero, B=zero, C=C, D=D, S=S, S0=S0, S1=S1, S2=S2,
        n=n, P=P, n0=n0, n1=n1, n2=n2, P0=P0, P1=P1, P2=P2, tau120=tau120, tau210=tau210,
        m=m, E=E, q=q, Q1=Q1, Q2=Q2, w=w,
    )


def q1(s: OdeTorusStructure, check: bool = True) -> PeriodicScalarField:
    """``Q1 = -(F_2222 + 10 F_22 + 9 F) / 6``; only alpha-derivatives enter.

    Applied as the alpha-multiplier ``-(k^2 - 1)(k^2 - 9) / 6`` on the resolved
    band.  Modes above it are certified negligible by the resolution check, and
    dropping them keeps rounding noise from being amplified by ``k^4``.
    """
    if check:
        check_resolution(s.F)
    F = s.F
    na = F.spec.Na
    k = np.fft.rfftfreq(na, d=1.0 / na)
    mult = -(k * k - 1.0) * (k * k - 9.0) / 6.0
    mult[k > resolved_bandwidth(na)] = 0.0
    out = np.fft.irfft(np.fft.rfft(F.samples, axis=2) * mult, n=na, axis=2)
    return PeriodicScalarField(F.spec, out)


def q2(s: OdeTorusStructure, check: bool = True) -> PeriodicScalarField:
    """Direct polynomial expression of ``Q2`` in frame derivatives of ``F``."""
    if check:
        check_resolution(s.F)
    F = s.F
    d = _FrameJets(F)
    F0, F1, F2 = d(0), d(1), d(2)
    F22 = d(2, 2)
    total = (
        d(2, 2, 1, 1)
        + 3.0 * d(1, 1)
        - 4.0 * d(2, 0, 1)
        + F1 * F2
        + 4.0 * F * d(2, 1)
        - F2 * d(2, 2, 1)
        + 4.0 * F2 * d(2, 0)
        - 4.0 * F * F2 * F2
        - 3.0 * F22 * F0
        + 3.0 * F22 * F * F
        - 21.0 * F * F0
        + 9.0 * F ** 3
        + 6.0 * d(0, 0)
    )
    return total / 6.0


def q2_from_chain(bundle: EnrichedCurvatureBundle) -> PeriodicScalarField:
    """``Q2 = -P_1 - (3/2) S tau21 + tau210``."""
    return -bundle.P1 - 1.5 * bundle.S * bundle.tau21 + bundle.tau210


def mu_integrand_pointwise(s: OdeTorusStructure, check: bool = True) -> Form3:
    """``s^* TC_2`` before any integration by parts, as a coefficient of theta^theta1^theta2.

    Coordinate partials are written out literally; ``F_alpha...x cos + ... + F F_alpha...alpha``
    is the frame-1 derivative and ``-F_x sin + F_y cos`` the frame-0 derivative.
    """
    if check:
        check_resolution(s.F)
    F = s.F
    c, sn = _trig(F.spec)
    Fa = dalpha(F)
    Faa = dalpha(F, 2)
    Faaa = dalpha(F, 3)
    Faaaa = dalpha(F, 4)
    term1 = dx(Faaa) * c + dy(Faaa) * sn + Faaaa * F
    term2 = dx(Fa) * c + dy(Fa) * sn + Faa * F
    term3 = -dx(Faa) * sn + dy(Faa) * c
    term4 = -dx(F) * sn + dy(F) * c
    total = 2.0 * term1 + 14.0 * term2 - 3.0 * term3 - 21.0 * term4 + 18.0 * F * F + 6.0 * F * Faa
    return Form3(total / (12.0 * 8.0 * math.pi ** 2))


def mu_reduced_integrand(F: PeriodicScalarField) -> PeriodicScalarField:
    """``(18 F^2 - 20 F_a^2 + 2 F_aa^2) / 12``, the integrand of ``8 pi^2 mu``."""
    Fa = dalpha(F)
    Faa = dalpha(F, 2)
    return (18.0 * F * F - 20.0 * Fa * Fa + 2.0 * Faa * Faa) / 12.0


def mu(s: OdeTorusStructure, check: bool = True) -> float:
    """``mu = (1/96 pi^2) int (18 F^2 - 20 F_a^2 + 2 F_aa^2) dV``, equivalently ``-(1/8 pi^2) int F Q1``."""
    if check:
        check_resolution(s.F)
    return integrate_volume(mu_reduced_integrand(s.F)) / (8.0 * math.pi ** 2)


def pi3_density(n1, S0, S1, S2, C, D, S, tau12, tau21, w: Form1) -> Form3:
    """``8 pi^2`` times the pulled-back transgression form of a strict structure.

    ``(n1 - 3/4 S0 + 2 tau12 tau21) theta^theta1^theta2
    - w ^ ((3/2 S1 + 6C) theta^theta1 + (3/2 S2 + 6D) theta^theta2 + 9/2 S theta1^theta2)``.
    Coefficients may be constants or fields.
    """
    two = Form2(1.5 * S1 + 6.0 * C, 1.5 * S2 + 6.0 * D, 4.5 * S)
    return Form3(n1 - 0.75 * S0 + 2.0 * tau12 * tau21) - wedge12(w, two)


def mu_via_pi3(s: OdeTorusStructure, bundle: EnrichedCurvatureBundle | None = None) -> float:
    b = bundle if bundle is not None else curvature_chain(s)
    dens = pi3_density(b.n1, b.S0, b.S1, b.S2, b.C, b.D, b.S, b.tau12, b.tau21, b.w)
    return integrate_volume(dens.c012) / (8.0 * math.pi ** 2)


def connection_from_data(w: Form1, m, n, P, q, tau12, tau21) -> ConnectionMatrix:
    """The pulled-back connection with ``phi = 0``.

    ``w~ = w + m theta``, ``phi1 = tau12 theta2 - 3m theta1 + n theta``,
    ``phi2 = tau21 theta1 - 3m theta2 + P theta``,
    ``psi~ = (P/2) theta1 + (n/2) theta2 + q theta``.
    """
    wt = w + THETA * m
    phi1 = Form1(n, -3.0 * m, tau12)
    phi2 = Form1(P, tau21, -3.0 * m)
    psi = Form1(q, P / 2.0, n / 2.0)
    return ConnectionMatrix([
        [wt, phi2, psi],
        [THETA1, wt * -2.0, phi1],
        [THETA, THETA2, wt],
    ])


def assemble_connection(s: OdeTorusStructure, bundle: EnrichedCurvatureBundle | None = None) -> ConnectionMatrix:
    b = bundle if bundle is not None else curvature_chain(s)
    return connection_from_data(b.w, b.m, b.n, b.P, b.q, b.tau12, b.tau21)


# theta^theta1^theta2 is declared positive, so the top-form coefficient integrates as is.
ORIENTATION = 1.0


def mu_via_transgression(s: OdeTorusStructure, bundle: EnrichedCurvatureBundle | None = None) -> float:
    pi = assemble_connection(s, bundle)
    return ORIENTATION * integrate_volume(transgression3(pi).c012)


def kernel_residual(F: PeriodicScalarField) -> float:
    """RMS of ``F`` minus its projection onto the alpha-modes ``+-1`` and ``+-3``."""
    spec = np.fft.fft(F.samples, axis=2)
    k = np.abs(np.fft.fftfreq(F.spec.Na, d=1.0 / F.spec.Na))
    spec[..., (k == 1) | (k == 3)] = 0.0
    rest = np.fft.ifft(spec, axis=2).real
    return float(np.sqrt(np.mean(rest * rest)))


@dataclass(frozen=True)
class FlatnessReport:
    max_q1: float
    max_q2: float
    mu: float
    kernel_residual: float
    tolerance: float
    q1_flat: bool
    q2_flat: bool
    flat: bool
    mu_zero: bool
    in_q1_kernel: bool

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def flatness_report(s: OdeTorusStructure, tol: float = 1e-9) -> FlatnessReport:
    """Curvature sizes and verdicts; tolerances are relative to ``max(1, max|F|)``."""
    scale = max(1.0, s.F.max_abs())
    a = q1(s).max_abs()
    b = q2(s).max_abs()
    m = mu(s)
    r = kernel_residual(s.F)
    q1_flat = a <= tol * scale
    q2_flat = b <= tol * scale
    return FlatnessReport(
        max_q1=a, max_q2=b, mu=m, kernel_residual=r, tolerance=tol,
        q1_flat=q1_flat, q2_flat=q2_flat, flat=q1_flat and q2_flat,
        mu_zero=abs(m) <= tol * scale ** 2, in_q1_kernel=r <= tol * scale,
    )
