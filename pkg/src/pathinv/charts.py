"""Cartan's invariants of ``y'' = G(x, y, p)`` in the slope chart.

Derivatives of ``G`` come from :mod:`pathinv.jets` whenever ``G`` can be
evaluated on jets (parsed expressions and spectral interpolants can); opaque
callables fall back to central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets
from .expr import Node, compile_function, parse, variables
from .grid import PERIODS, PeriodicScalarField


class OutOfBoxError(ValueError):
    """A point lies outside the sampling box of a p-chart structure."""


class DifferentiationError(ArithmeticError):
    """Numerical differentiation produced non-finite values."""


@dataclass(frozen=True)
class PBox:
    x: tuple = (0.0, 1.0)
    y: tuple = (0.0, 1.0)
    p: tuple = (-4.0, 4.0)
    counts: tuple = (9, 9, 257)

    def nodes(self):
        """Chebyshev-Lobatto nodes per axis, broadcastable as (nx,1,1), (1,ny,1), (1,1,np)."""
        out = []
        for axis, (lo, hi) in enumerate((self.x, self.y, self.p)):
            n = self.counts[axis]
            j = np.arange(n)
            t = (1.0 - np.cos(math.pi * j / (n - 1))) / 2.0 if n > 1 else np.array([0.5])
            shape = [1, 1, 1]
            shape[axis] = n
            out.append((lo + (hi - lo) * t).reshape(shape))
        return tuple(out)

    def contains(self, x, y, p, slack: float = 1e-12) -> bool:
        for v, (lo, hi) in zip((x, y, p), (self.x, self.y, self.p)):
            v = np.asarray(v.value if isinstance(v, jets.Jet) else v)
            span = slack * max(1.0, hi - lo)
            if np.any(v < lo - span) or np.any(v > hi + span):
                return False
        return True


@dataclass(frozen=True)
class PChartOde:
    """``y'' = G(x, y, p)`` sampled on a bounded box.

    ``jet_aware`` says that ``G`` accepts :class:`~pathinv.jets.Jet` arguments.
    ``degree`` is the polynomial degree in ``p`` when known.
    """

    G: Callable
    ast: Optional[Node] = None
    box: PBox = field(default_factory=PBox)
    degree: Optional[int] = None
    jet_aware: bool = False

    @classmethod
    def from_expression(cls, text: str, box: PBox | None = None) -> "PChartOde":
        ast = parse(text, chart="p")
        return cls(compile_function(ast, ("x", "y", "p")), ast, box or PBox(), None, True)

    @classmethod
    def from_polynomial(cls, coeffs, box: PBox | None = None) -> "PChartOde":
        """``G = sum_k c_k(x, y) p^k``; each ``c_k`` is a number or an (x, y) expression."""
        asts = []
        for c in coeffs:
            ast = parse(str(c), chart="p") if not isinstance(c, (int, float)) else parse(repr(float(c)))
            if "p" in variables(ast):
                raise ValueError("polynomial coefficients must not depend on p")
            asts.append(ast)
        fns = [compile_function(a, ("x", "y")) for a in asts]

        def G(x, y, p):
            acc = 0.0
            for c in reversed(fns):
                acc = acc * p + c(x, y)
            return acc

        degree = len(coeffs) - 1
        while degree > 0 and isinstance(coeffs[degree], (int, float)) and coeffs[degree] == 0:
            degree -= 1
        return cls(G, None, box or PBox(), degree, True)

    def __call__(self, x, y, p):
        if not self.box.contains(x, y, p):
            raise OutOfBoxError("point outside the p-chart sampling box")
        return self.G(x, y, p)


def _as_callable(f):
    if isinstance(f, PChartOde):
        return f.G, f.jet_aware
    if isinstance(f, str):
        return compile_function(parse(f, chart="p"), ("x", "y", "p")), True
    return f, getattr(f, "jet_aware", False)


def _full(v, shape):
    return np.broadcast_to(np.asarray(v, dtype=float), shape)


def _jet_of(fn, x, y, p, order):
    shape = np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(p))
    X, Y, P = jets.seed(3, order, (_full(x, shape), _full(y, shape), _full(p, shape)))
    out = fn(X, Y, P)
    if not isinstance(out, jets.Jet):
        out = jets.Jet.constant(3, order, _full(out, shape))
    return out, P


# Central-difference weights on symmetric stencils (second-order accurate).
_FD = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def _fd_partial(fn, x, y, p, multi_index, h=None):
    """Tensor-product central difference of ``fn`` with a step adapted to the order."""
    k = sum(multi_index)
    if h is None:
        h = np.finfo(float).eps ** (1.0 / (k + 2)) if k else 1.0
    acc = 0.0
    base = (np.asarray(x, float), np.asarray(y, float), np.asarray(p, float))
    grids = [list(zip(*_FD[m])) for m in multi_index]
    for ox, wx in grids[0]:
        for oy, wy in grids[1]:
            for op, wp in grids[2]:
                pt = (base[0] + ox * h, base[1] + oy * h, base[2] + op * h)
                acc = acc + wx * wy * wp * np.asarray(fn(*pt), dtype=float)
    out = acc / h ** k
    if not np.all(np.isfinite(out)):
        raise DifferentiationError("finite differences produced non-finite values")
    return out


def _derivatives(fn, jet_aware, x, y, p, wanted, order):
    if jet_aware:
        J, _ = _jet_of(fn, x, y, p, order)
        return {m: J.derivative(m) for m in wanted}
    return {m: _fd_partial(fn, x, y, p, m) for m in wanted}


def total_x_derivative(f, G) -> Callable:
    """``df/dx = f_x + p f_y + G f_p`` along solutions of ``y'' = G``."""
    fn, f_jets = _as_callable(f)
    gn, _ = _as_callable(G)
    box = G.box if isinstance(G, PChartOde) else None

    def out(x, y, p):
        if box is not None and not box.contains(x, y, p):
            raise OutOfBoxError("point outside the p-chart sampling box")
        d = _derivatives(fn, f_jets, x, y, p, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], 1)
        return d[(1, 0, 0)] + p * d[(0, 1, 0)] + gn(x, y, p) * d[(0, 0, 1)]

    return out


def q1_p(o: PChartOde) -> Callable:
    """``Q1 = -G_pppp / 6`` at the section ``a1 = a2 = 1``."""

    def out(x, y, p):
        if not o.box.contains(x, y, p):
            raise OutOfBoxError("point outside the p-chart sampling box")
        shape = np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(p))
        if o.degree is not None and o.degree <= 3:
            return np.zeros(shape)
        if o.jet_aware:
            P = jets.Jet.variable(1, 4, 0, _full(p, shape))
            g = o.G(_full(x, shape), _full(y, shape), P)
            if not isinstance(g, jets.Jet):
                return np.zeros(shape)
            return -g.derivative((4,)) / 6.0
        return -_fd_partial(o.G, x, y, p, (0, 0, 4)) / 6.0

    return out


def q2_p(o: PChartOde) -> Callable:
    """``Q2 = (6G_yy - 3G_y G_pp + 4G_p G_yp - G_p D(G_pp) - 4 D(G_yp) + D^2(G_pp)) / 6``

    with ``D`` the total x-derivative.
    """

    def out(x, y, p):
        if not o.box.contains(x, y, p):
            raise OutOfBoxError("point outside the p-chart sampling box")
        if o.jet_aware:
            J, P = _jet_of(o.G, x, y, p, 4)
            return _q2_from_jet(J, P)
        return _q2_fd(o.G, x, y, p)

    return out


def _q2_from_jet(J: jets.Jet, P: jets.Jet) -> np.ndarray:
    def D(f: jets.Jet) -> jets.Jet:
        r = f.order - 1
        return f.partial(0) + P.truncate(r) * f.partial(1) + J.truncate(r) * f.partial(2)

    Gp = J.partial(2)
    Gpp = Gp.partial(2)
    Gy = J.partial(1)
    Gyp = Gy.partial(2)
    Gyy = Gy.partial(1)
    DGpp = D(Gpp)
    total = (
        6.0 * Gyy.value
        - 3.0 * Gy.value * Gpp.value
        + 4.0 * Gp.value * Gyp.value
        - Gp.value * DGpp.value
        - 4.0 * D(Gyp).value
        + D(DGpp).value
    )
    return total / 6.0


def _q2_fd(G, x, y, p) -> np.ndarray:
    # D and D^2 expanded into plain partials of G
    need = [
        (0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 2, 0), (0, 0, 2), (0, 1, 1),
        (1, 0, 2), (0, 1, 2), (0, 0, 3), (1, 1, 1), (0, 2, 1),
        (2, 0, 2), (1, 1, 2), (0, 2, 2), (1, 0, 3), (0, 1, 3), (0, 0, 4),
    ]
    d = {m: _fd_partial(G, x, y, p, m) for m in need}
    g, gx, gy, gp = d[(0, 0, 0)], d[(1, 0, 0)], d[(0, 1, 0)], d[(0, 0, 1)]
    gppp = d[(0, 0, 3)]
    dgpp = d[(1, 0, 2)] + p * d[(0, 1, 2)] + g * gppp
    dgyp = d[(1, 1, 1)] + p * d[(0, 2, 1)] + g * d[(0, 1, 2)]
    d2gpp = (
        d[(2, 0, 2)] + 2.0 * p * d[(1, 1, 2)] + p * p * d[(0, 2, 2)]
        + 2.0 * g * d[(1, 0, 3)] + 2.0 * p * g * d[(0, 1, 3)] + g * g * d[(0, 0, 4)]
        + gppp * (gx + p * gy + g * gp) + g * d[(0, 1, 2)]
    )
    total = (6.0 * d[(0, 2, 0)] - 3.0 * gy * d[(0, 0, 2)] + 4.0 * gp * d[(0, 1, 1)]
             - gp * dgpp - 4.0 * dgyp + d2gpp)
    return total / 6.0


# alpha -> p conversion

def _sparse_modes(F: PeriodicScalarField, rel: float = 1e-14):
    coef = np.fft.fftn(F.samples) / F.samples.size
    keep = np.abs(coef) > rel * max(np.abs(coef).max(), 1e-300)
    idx = np.argwhere(keep)
    shape = F.spec.shape
    freqs = [np.fft.fftfreq(n, d=1.0 / n)[idx[:, i]] for i, n in enumerate(shape)]
    return np.stack(freqs, axis=1), coef[keep]


class SpectralInterpolant:
    """Trigonometric interpolant ``F(x, y, alpha)`` of a sampled field.

    Accepts arrays or jets; only the nonzero Fourier modes are summed, so it
    is cheap for band-limited fields.
    """

    jet_aware = True

    def __init__(self, F: PeriodicScalarField):
        self.freqs, self.coef = _sparse_modes(F)

    def __call__(self, x, y, a):
        args = (x, y, a)
        cache = [{}, {}, {}]

        def e(axis, k):
            # (cos, sin) of the axis phase 2 pi k t / period
            if k not in cache[axis]:
                ph = args[axis] * (2.0 * math.pi * k / PERIODS[axis])
                cache[axis][k] = (jets.cos(ph), jets.sin(ph))
            return cache[axis][k]

        total = 0.0
        for (kx, ky, ka), c in zip(self.freqs, self.coef):
            cx, sx = e(0, kx)
            cy, sy = e(1, ky)
            ca, sa = e(2, ka)
            cxy = cx * cy - sx * sy
            sxy = sx * cy + cx * sy
            cos_t = cxy * ca - sxy * sa
            sin_t = sxy * ca + cxy * sa
            total = total + (c.real * cos_t - c.imag * sin_t)
        return total


def alpha_to_p(F: PeriodicScalarField, cover: str = "double", box: PBox | None = None) -> PChartOde:
    """Express ``theta2 = dalpha - F theta1`` as ``y'' = G(x, y, p)``.

    ``cover="double"`` uses ``p = tan(alpha)`` on the torus coframe, giving
    ``G = F(x, y, atan p) (1 + p^2)^{3/2}``.  ``cover="single"`` uses the
    half-angle chart ``p = tan(alpha/2)``, giving
    ``G = F(x, y, 2 atan p) (1 + p^2)^{3/2} / 2``.
    """
    if cover not in ("double", "single"):
        raise ValueError(f"cover must be 'double' or 'single', got {cover!r}")
    interp = SpectralInterpolant(F)
    box = box or PBox()

    def G(x, y, p):
        w = jets.power(p * p + 1.0, 1.5)
        if cover == "double":
            return interp(x, y, jets.atan(p)) * w
        return interp(x, y, 2.0 * jets.atan(p)) * w * 0.5

    return PChartOde(G, None, box, None, True)
