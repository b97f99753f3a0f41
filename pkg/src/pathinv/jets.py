"""Truncated multivariate Taylor jets for exact low-order derivatives.

A :class:`Jet` carries every Taylor coefficient of total degree ``<= order`` in
``nvars`` variables, each coefficient being an array over the sample points.
Arithmetic and the elementary functions used by the expression language act on
jets, so evaluating an expression on seeded jets yields its partial derivatives
to machine precision without finite differences.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np


@lru_cache(maxsize=None)
def _monomials(nvars: int, order: int) -> tuple:
    out = []
    for deg in range(order + 1):
        for combo in combinations_with_replacement(range(nvars), deg):
            idx = [0] * nvars
            for v in combo:
                idx[v] += 1
            out.append(tuple(idx))
    return tuple(out)


@lru_cache(maxsize=None)
def _index(nvars: int, order: int) -> dict:
    return {m: i for i, m in enumerate(_monomials(nvars, order))}


@lru_cache(maxsize=None)
def _mul_table(nvars: int, order: int) -> tuple:
    monos = _monomials(nvars, order)
    index = _index(nvars, order)
    table = []
    for i, a in enumerate(monos):
        for j, b in enumerate(monos):
            s = tuple(p + q for p, q in zip(a, b))
            k = index.get(s)
            if k is not None:
                table.append((i, j, k))
    return tuple(table)


class Jet:
    """Truncated Taylor expansion around a batch of points."""

    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, nvars: int, order: int, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[0] != len(_monomials(nvars, order)):
            raise ValueError("coefficient count does not match (nvars, order)")
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs

    @classmethod
    def constant(cls, nvars: int, order: int, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((len(_monomials(nvars, order)),) + value.shape)
        c[0] = value
        return cls(nvars, order, c)

    @classmethod
    def variable(cls, nvars: int, order: int, which: int, value) -> "Jet":
        """The jet of coordinate ``which`` seeded at ``value``."""
        j = cls.constant(nvars, order, value)
        if order >= 1:
            e = [0] * nvars
            e[which] = 1
            j.coeffs[_index(nvars, order)[tuple(e)]] = 1.0
        return j

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def __repr__(self):
        return f"Jet(nvars={self.nvars}, order={self.order}, shape={self.shape})"

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            if (other.nvars, other.order) != (self.nvars, self.order):
                raise ValueError("incompatible jets")
            return other
        return Jet.constant(self.nvars, self.order, other)

    def __add__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            shape = np.broadcast_shapes(self.shape, other.shape)
            c = np.array(np.broadcast_to(self.coeffs, self.coeffs.shape[:1] + shape))
            c[0] = c[0] + other
            return Jet(self.nvars, self.order, c)
        return Jet(self.nvars, self.order, self.coeffs + self._lift(other).coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.nvars, self.order, -self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.nvars, self.order, self.coeffs * np.asarray(other, dtype=float))
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((a.shape[0],) + shape)
        for i, j, k in _mul_table(self.nvars, self.order):
            out[k] += a[i] * b[j]
        return Jet(self.nvars, self.order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise ZeroDivisionError("division by zero")
        return Jet(self.nvars, self.order, self.coeffs / other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, k):
        return power(self, k)

    def __rpow__(self, base):
        return exp(self * np.log(np.asarray(base, dtype=float)))

    def nilpotent(self) -> "Jet":
        c = self.coeffs.copy()
        c[0] = 0.0
        return Jet(self.nvars, self.order, c)

    def partial(self, which: int) -> "Jet":
        """Exact partial derivative; the result has order one lower."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        lower = _monomials(self.nvars, self.order - 1)
        index = _index(self.nvars, self.order)
        out = np.zeros((len(lower),) + self.shape)
        for i, m in enumerate(lower):
            up = list(m)
            up[which] += 1
            out[i] = (m[which] + 1) * self.coeffs[index[tuple(up)]]
        return Jet(self.nvars, self.order - 1, out)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise jet order")
        n = len(_monomials(self.nvars, order))
        return Jet(self.nvars, order, self.coeffs[:n])

    def derivative(self, multi_index) -> np.ndarray:
        """The partial derivative ``d^|a| f / dx^a`` at the base points."""
        multi_index = tuple(multi_index)
        k = _index(self.nvars, self.order).get(multi_index)
        if k is None:
            raise ValueError(f"derivative {multi_index} exceeds jet order {self.order}")
        factor = math.prod(math.factorial(a) for a in multi_index)
        return factor * self.coeffs[k]


def _compose(u: Jet, taylor) -> Jet:
    """``sum_k taylor[k] * (u - u0)^k`` by Horner's rule."""
    h = u.nilpotent()
    acc = Jet.constant(u.nvars, u.order, taylor[-1])
    for c in reversed(taylor[:-1]):
        acc = acc * h + c
    return acc


def _univariate(u0, order: int, fn) -> list:
    """Taylor coefficients of ``fn`` at ``u0`` via a one-variable jet."""
    t = Jet.variable(1, order, 0, u0)
    return list(fn(t).coeffs)


def reciprocal(u):
    if not isinstance(u, Jet):
        u = np.asarray(u, dtype=float)
        if np.any(u == 0):
            raise ZeroDivisionError("division by zero")
        return 1.0 / u
    u0 = u.value
    if np.any(u0 == 0):
        raise ZeroDivisionError("division by zero")
    inv = 1.0 / u0
    taylor = [(-1) ** k * inv ** (k + 1) for k in range(u.order + 1)]
    return _compose(u, taylor)


def power(u, k):
    if isinstance(k, Jet):
        return exp(k * log(u))
    if not isinstance(u, Jet):
        return np.power(np.asarray(u, dtype=float), k)
    k_arr = np.asarray(k, dtype=float)
    if k_arr.ndim == 0 and float(k_arr).is_integer():
        n = int(k_arr)
        if n < 0:
            return power(reciprocal(u), -n)
        result = Jet.constant(u.nvars, u.order, np.ones(u.shape))
        base = u
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result
    u0 = u.value
    if np.any(u0 <= 0):
        raise ValueError("non-integer power of a non-positive base")
    taylor = []
    coef = np.ones_like(k_arr)
    for j in range(u.order + 1):
        taylor.append(coef * u0 ** (k_arr - j) / math.factorial(j))
        coef = coef * (k_arr - j)
    return _compose(u, taylor)


def exp(u):
    if not isinstance(u, Jet):
        return np.exp(u)
    e = np.exp(u.value)
    return _compose(u, [e / math.factorial(j) for j in range(u.order + 1)])


def log(u):
    if not isinstance(u, Jet):
        return np.log(u)
    u0 = u.value
    if np.any(u0 <= 0):
        raise ValueError("log of a non-positive value")
    taylor = [np.log(u0)]
    for j in range(1, u.order + 1):
        taylor.append((-1) ** (j - 1) / (j * u0 ** j))
    return _compose(u, taylor)


def _sincos_taylor(u0, order, start):
    # derivatives of sin cycle through sin, cos, -sin, -cos
    cyc = [np.sin(u0), np.cos(u0), -np.sin(u0), -np.cos(u0)]
    return [cyc[(start + j) % 4] / math.factorial(j) for j in range(order + 1)]


def sin(u):
    if not isinstance(u, Jet):
        return np.sin(u)
    return _compose(u, _sincos_taylor(u.value, u.order, 0))


def cos(u):
    if not isinstance(u, Jet):
        return np.cos(u)
    return _compose(u, _sincos_taylor(u.value, u.order, 1))


def tan(u):
    if not isinstance(u, Jet):
        return np.tan(u)
    return sin(u) / cos(u)


def sqrt(u):
    if not isinstance(u, Jet):
        return np.sqrt(u)
    return power(u, 0.5)


def atan(u):
    if not isinstance(u, Jet):
        return np.arctan(u)
    # integrate the series of 1/(1+t^2) term by term
    g = _univariate(u.value, u.order, lambda t: reciprocal(t * t + 1.0))
    taylor = [np.arctan(u.value)] + [g[j - 1] / j for j in range(1, u.order + 1)]
    return _compose(u, taylor)


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "atan": atan,
    "exp": exp,
    "sqrt": sqrt,
}


def seed(nvars: int, order: int, values) -> list:
    """Coordinate jets for ``values`` (one broadcastable array per variable)."""
    values = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in values])
    return [Jet.variable(nvars, order, i, v) for i, v in enumerate(values)]
