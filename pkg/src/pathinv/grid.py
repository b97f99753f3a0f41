"""Periodic scalar fields on the 3-torus with spectral derivatives.

Coordinates are ``(x, y, alpha)`` with periods ``(1, 1, 2*pi)``.  The coframe
used throughout the package is

    theta  = cos(alpha) dy - sin(alpha) dx
    theta1 = sin(alpha) dy + cos(alpha) dx
    theta2 = dalpha - F theta1

and :func:`frame_derivatives` returns the coefficients of ``df`` in that basis.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PERIODS = (1.0, 1.0, 2.0 * math.pi)
AXES = {"x": 0, "y": 1, "alpha": 2}


class GridMismatchError(ValueError):
    """Two fields defined on different grids were combined."""


class ResolutionError(ArithmeticError):
    """The grid does not resolve the spectral content of a field."""


@dataclass(frozen=True)
class GridSpec:
    Nx: int = 64
    Ny: int = 64
    Na: int = 128

    def __post_init__(self):
        for name in ("Nx", "Ny", "Na"):
            n = getattr(self, name)
            if not isinstance(n, (int, np.integer)) or n < 4 or n % 2:
                raise ValueError(f"{name}={n!r}: grid counts must be even integers >= 4")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``"64x64x128"``."""
        try:
            nx, ny, na = (int(t) for t in text.lower().split("x"))
        except ValueError:
            raise ValueError(f"bad grid spec {text!r}, expected NXxNYxNA") from None
        return cls(nx, ny, na)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.Nx, self.Ny, self.Na)

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(p / n for p, n in zip(PERIODS, self.shape))

    def __str__(self):
        return f"{self.Nx}x{self.Ny}x{self.Na}"

    def axes(self):
        """1-D node coordinates along each axis."""
        return tuple(np.arange(n) * (p / n) for n, p in zip(self.shape, PERIODS))

    def mesh(self):
        """Broadcastable coordinate arrays ``(x, y, alpha)`` of shape (Nx,1,1) etc."""
        x, y, a = self.axes()
        return x[:, None, None], y[None, :, None], a[None, None, :]

    def coordinates(self):
        """Full ``(x, y, alpha)`` arrays of the grid shape."""
        return tuple(np.broadcast_to(c, self.shape) for c in self.mesh())

    @property
    def volume(self) -> float:
        return PERIODS[0] * PERIODS[1] * PERIODS[2]


@functools.lru_cache(maxsize=32)
def _wavenumbers(n: int, period: float, order: int) -> np.ndarray:
    k = np.fft.fftfreq(n, d=1.0 / n)
    if order % 2:
        # odd derivatives of the Nyquist mode are not representable on real data
        k[n // 2] = 0.0
    return (1j * 2.0 * math.pi * k / period) ** order


@functools.lru_cache(maxsize=8)
def _trig(spec: GridSpec):
    a = spec.mesh()[2]
    return np.cos(a), np.sin(a)


class PeriodicScalarField:
    """Real samples of a periodic function on a :class:`GridSpec` grid.

    Arithmetic with numbers and fields on the same grid is pointwise.  The
    sample array is read-only.
    """

    __array_priority__ = 100

    def __init__(self, spec: GridSpec, samples):
        samples = np.array(np.broadcast_to(samples, spec.shape), dtype=float)
        if not np.all(np.isfinite(samples)):
            raise ValueError("field samples must be finite")
        samples.setflags(write=False)
        self.spec = spec
        self.samples = samples

    @classmethod
    def from_function(cls, spec: GridSpec, fn) -> "PeriodicScalarField":
        x, y, a = spec.mesh()
        return cls(spec, fn(x, y, a))

    @classmethod
    def constant(cls, spec: GridSpec, value: float) -> "PeriodicScalarField":
        return cls(spec, np.full(spec.shape, float(value)))

    def __repr__(self):
        return f"PeriodicScalarField({self.spec}, max|f|={self.max_abs():.3g})"

    # -- arithmetic -------------------------------------------------------
    def _other(self, other):
        if isinstance(other, PeriodicScalarField):
            if other.spec != self.spec:
                raise GridMismatchError(f"grid {self.spec} vs {other.spec}")
            return other.samples
        if isinstance(other, (int, float, np.floating, np.integer)):
            return float(other)
        if isinstance(other, np.ndarray):
            # node-aligned arrays such as the cached cos/sin of alpha
            np.broadcast_shapes(other.shape, self.spec.shape)
            return other
        return NotImplemented

    def _wrap(self, values):
        return PeriodicScalarField(self.spec, values)

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.samples + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.samples - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self.samples)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.samples * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.samples / o)

    def __rtruediv__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(o / self.samples)

    def __neg__(self):
        return self._wrap(-self.samples)

    def __pos__(self):
        return self

    def __pow__(self, k):
        return self._wrap(self.samples ** k)

    # -- reductions -------------------------------------------------------
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def l2(self) -> float:
        """Root-mean-square norm over the torus (volume-normalised)."""
        return float(np.sqrt(np.mean(self.samples ** 2)))

    def spectrum(self) -> np.ndarray:
        """Normalised complex Fourier coefficients, ``fftn(samples) / size``."""
        return np.fft.fftn(self.samples) / self.samples.size

    def allclose(self, other, atol=1e-12) -> bool:
        return float(np.max(np.abs(self.samples - self._other(other)))) <= atol


Field = PeriodicScalarField


def _diff(f: PeriodicScalarField, axis: int, order: int = 1) -> PeriodicScalarField:
    n = f.spec.shape[axis]
    mult = _wavenumbers(n, PERIODS[axis], order)
    shape = [1, 1, 1]
    shape[axis] = n
    spec_vals = np.fft.fft(f.samples, axis=axis) * mult.reshape(shape)
    return PeriodicScalarField(f.spec, np.fft.ifft(spec_vals, axis=axis).real)


def dx(f: PeriodicScalarField, order: int = 1) -> PeriodicScalarField:
    return _diff(f, 0, order)


def dy(f: PeriodicScalarField, order: int = 1) -> PeriodicScalarField:
    return _diff(f, 1, order)


def dalpha(f: PeriodicScalarField, order: int = 1) -> PeriodicScalarField:
    return _diff(f, 2, order)


def frame_derivatives(f: PeriodicScalarField, F: PeriodicScalarField):
    """Coefficients ``(f0, f1, f2)`` of ``df = f0 theta + f1 theta1 + f2 theta2``.

    Inverts ``f_x = -f0 sin(a) + (f1 - f2 F) cos(a)``,
    ``f_y = f0 cos(a) + (f1 - f2 F) sin(a)`` and ``f_alpha = f2``.
    """
    if f.spec != F.spec:
        raise GridMismatchError(f"grid {f.spec} vs {F.spec}")
    c, s = _trig(f.spec)
    fx, fy, fa = dx(f).samples, dy(f).samples, dalpha(f).samples
    spec = f.spec
    return (
        PeriodicScalarField(spec, -fx * s + fy * c),
        PeriodicScalarField(spec, fx * c + fy * s + F.samples * fa),
        PeriodicScalarField(spec, fa),
    )


def frame_derivative(f: PeriodicScalarField, F: PeriodicScalarField, index: int) -> PeriodicScalarField:
    """A single frame derivative; cheaper than :func:`frame_derivatives` for ``index`` 0 or 2."""
    c, s = _trig(f.spec)
    if index == 2:
        return dalpha(f)
    if index == 0:
        return PeriodicScalarField(f.spec, -dx(f).samples * s + dy(f).samples * c)
    if index == 1:
        if f.spec != F.spec:
            raise GridMismatchError(f"grid {f.spec} vs {F.spec}")
        return PeriodicScalarField(
            f.spec, dx(f).samples * c + dy(f).samples * s + F.samples * dalpha(f).samples
        )
    raise ValueError(f"frame index must be 0, 1 or 2, got {index}")


def integrate_volume(f: PeriodicScalarField) -> float:
    """Trapezoid rule for ``int f dx dy dalpha`` over the full torus."""
    return float(np.mean(f.samples)) * f.spec.volume


def tail_fraction(f: PeriodicScalarField, axis: int, keep: int, weight_power: int = 0) -> float:
    """Share of (optionally ``|k|^p``-weighted) spectral energy in modes ``|k| > keep``."""
    n = f.spec.shape[axis]
    power = np.abs(np.fft.fft(f.samples, axis=axis)) ** 2
    other = tuple(i for i in range(3) if i != axis)
    per_mode = power.sum(axis=other)
    k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    w = (1.0 + k * k) ** (weight_power / 2) if weight_power else np.ones(n)
    total = float(np.sum(per_mode * w))
    if total == 0.0:
        return 0.0
    return float(np.sum((per_mode * w)[k > keep])) / total


def resolved_bandwidth(n: int) -> int:
    """Largest mode index a pipeline on ``n`` samples can carry without aliasing."""
    return max((n - 16) // 4, 0)


def check_resolution(f: PeriodicScalarField, threshold: float = 1e-8, alpha_weight: int = 4) -> dict:
    """Raise :class:`ResolutionError` if ``f`` has spectral energy beyond the usable band.

    The alpha axis is weighted by ``|k|^4`` since fourth alpha-derivatives
    enter the curvature.
    """
    tails = {}
    for name, axis in AXES.items():
        keep = resolved_bandwidth(f.spec.shape[axis])
        p = alpha_weight if name == "alpha" else 0
        tails[name] = tail_fraction(f, axis, keep, p)
    bad = {k: v for k, v in tails.items() if v > threshold}
    if bad:
        detail = ", ".join(f"{k}: {v:.2e}" for k, v in bad.items())
        raise ResolutionError(
            f"grid {f.spec} under-resolves the field (tail energy {detail} > {threshold:g})"
        )
    return tails


def write_csv(path, f: PeriodicScalarField) -> None:
    """Dump ``x,y,alpha,value`` rows, x varying fastest, at 17 significant digits."""
    coords = [c.transpose(2, 1, 0).ravel() for c in f.spec.coordinates()]
    table = np.column_stack(coords + [f.samples.transpose(2, 1, 0).ravel()])
    np.savetxt(Path(path), table, delimiter=",", header="x,y,alpha,value", comments="", fmt="%.17g")


def read_csv(path) -> PeriodicScalarField:
    """Inverse of :func:`write_csv`; the grid is inferred from the distinct node coordinates."""
    rows = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    xs, ys, als = (np.unique(rows[:, i]) for i in range(3))
    spec = GridSpec(len(xs), len(ys), len(als))
    if rows.shape[0] != len(xs) * len(ys) * len(als):
        raise ValueError(f"{path}: {rows.shape[0]} rows do not fill a {spec} grid")
    expect = np.array([h * p for h, p in zip(spec.spacing, (1, 1, 1))])
    got = np.array([xs[1] - xs[0], ys[1] - ys[0], als[1] - als[0]])
    if not np.allclose(got, expect, rtol=1e-9):
        raise ValueError(f"{path}: node spacing {got} does not match periodic grid {spec}")
    values = rows[:, 3].reshape(spec.Na, spec.Ny, spec.Nx).transpose(2, 1, 0)
    return PeriodicScalarField(spec, values)
