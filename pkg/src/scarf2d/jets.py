"""Truncated Taylor expansions ("jets") in one or two variables.

A :class:`Jet` of order ``K`` stores the normalized Taylor coefficients

    coeffs[i, j] = d1^i d2^j f / (i! j!)        (i + j <= K)

of a function at an expansion point. Coefficients live in a dense square
array whose lower-right corner (``i + j > K``) is kept at zero. Any trailing
axes are batch axes, so one jet can carry the expansion at many points at
once; all arithmetic broadcasts over them.

Elementary functions are applied by composing their univariate Taylor
coefficients with the nilpotent part of the argument (Horner scheme), which
keeps the lower-order coefficients independent of the truncation order.
"""
from __future__ import annotations

import math
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import DivisionByZero, OrderExceeded, PoleError

__all__ = [
    "Jet",
    "seed_variable",
    "seed_univariate",
    "constant",
    "lift",
    "arith",
    "extract",
    "embed",
    "outer",
    "taylor_coefficients",
    "sinh",
    "cosh",
    "tanh",
    "coth",
    "exp",
    "log",
    "arctan",
    "reciprocal",
    "power",
    "abs_power",
    "ELEMENTARY",
]

Scalar = Union[float, int, np.ndarray]


def _triangle(order: int, nvars: int) -> np.ndarray:
    if nvars == 1:
        return np.ones(order + 1, dtype=bool)
    idx = np.arange(order + 1)
    return (idx[:, None] + idx[None, :]) <= order


def _falling(i: int, k: int) -> np.ndarray:
    # (n + i)! / n! for n = 0..k
    return np.array([math.perm(n + i, i) for n in range(k + 1)], dtype=float)


class Jet:
    """Immutable truncated Taylor expansion, batched over trailing axes."""

    __slots__ = ("coeffs", "order", "nvars")
    # make ``ndarray * Jet`` dispatch to Jet.__rmul__
    __array_priority__ = 1000

    def __init__(self, coeffs, order: int, nvars: int = 2):
        coeffs = np.asarray(coeffs, dtype=float)
        if nvars not in (1, 2):
            raise ValueError("only univariate and bivariate jets are supported")
        if coeffs.shape[:nvars] != (order + 1,) * nvars:
            raise ValueError(
                f"coefficient array of shape {coeffs.shape} does not match "
                f"order {order} with {nvars} variable(s)"
            )
        coeffs.flags.writeable = False
        self.coeffs = coeffs
        self.order = int(order)
        self.nvars = nvars

    # ------------------------------------------------------------------ basics
    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.coeffs.shape[self.nvars:]

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[(0,) * self.nvars]

    def _mask(self, order: Optional[int] = None) -> np.ndarray:
        order = self.order if order is None else order
        tri = _triangle(order, self.nvars)
        return tri.reshape(tri.shape + (1,) * len(self.batch_shape))

    def truncate(self, order: int) -> "Jet":
        """Discard all coefficients of total degree above ``order``."""
        if order > self.order:
            raise OrderExceeded(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        sl = (slice(0, order + 1),) * self.nvars
        return Jet(self.coeffs[sl] * self._mask(order), order, self.nvars)

    def derivative(self, i: int, j: int = 0) -> "Jet":
        """Jet of d1^i d2^j f, of order ``order - i - j``."""
        k = self.order - i - j
        if k < 0:
            raise OrderExceeded(f"derivative ({i}, {j}) exceeds jet order {self.order}")
        if self.nvars == 1:
            if j:
                raise ValueError("univariate jet has no second variable")
            fac = _falling(i, k)
            out = self.coeffs[i:i + k + 1] * fac.reshape((-1,) + (1,) * len(self.batch_shape))
            return Jet(out, k, 1)
        fi, fj = _falling(i, k), _falling(j, k)
        fac = (fi[:, None] * fj[None, :]).reshape((k + 1, k + 1) + (1,) * len(self.batch_shape))
        out = self.coeffs[i:i + k + 1, j:j + k + 1] * fac * self._mask(k)
        return Jet(out, k, 2)

    def partial(self, i: int, j: int = 0) -> np.ndarray:
        """The mixed partial derivative d1^i d2^j f at the expansion point."""
        return extract(self, i, j)

    def nilpotent(self) -> "Jet":
        c = np.array(self.coeffs)
        c[(0,) * self.nvars] = 0.0
        return Jet(c, self.order, self.nvars)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, nvars={self.nvars}, batch={self.batch_shape})"

    # -------------------------------------------------------------- arithmetic
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("cannot combine jets with different numbers of variables")
            return other
        return constant(other, self.order, self.nvars)

    def _lift_array(self, x) -> np.ndarray:
        # align a batch-shaped array with the trailing axes of coeffs
        x = np.asarray(x, dtype=float)
        return x.reshape((1,) * self.nvars + x.shape)

    @staticmethod
    def _common(a: "Jet", b: "Jet") -> Tuple["Jet", "Jet"]:
        k = min(a.order, b.order)
        return a.truncate(k), b.truncate(k)

    def __add__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            batch = np.broadcast_shapes(self.batch_shape, other.shape)
            c = np.array(np.broadcast_to(self.coeffs, self.coeffs.shape[:self.nvars] + batch))
            c[(0,) * self.nvars] += other
            return Jet(c, self.order, self.nvars)
        a, b = self._common(self, self._coerce(other))
        return Jet(a.coeffs + b.coeffs, a.order, a.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.order, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * self._lift_array(other), self.order, self.nvars)
        a, b = self._common(self, self._coerce(other))
        return Jet(_cauchy(a.coeffs, b.coeffs, a.order, a.nvars), a.order, a.nvars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise DivisionByZero("division of a jet by zero")
            return Jet(self.coeffs / self._lift_array(other), self.order, self.nvars)
        other = self._coerce(other)
        if np.any(other.value == 0):
            raise DivisionByZero("divisor jet vanishes at the expansion point")
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        if np.any(self.value == 0):
            raise DivisionByZero("divisor jet vanishes at the expansion point")
        return reciprocal(self) * other

    def __pow__(self, p):
        return power(self, p)


def _cauchy(a: np.ndarray, b: np.ndarray, order: int, nvars: int) -> np.ndarray:
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape)
    n = order + 1
    if nvars == 1:
        for i in range(n):
            out[i:] += a[i] * b[:n - i]
        return out
    for i in range(n):
        for j in range(n - i):
            out[i:, j:] += a[i, j] * b[:n - i, :n - j]
    tri = _triangle(order, 2)
    return out * tri.reshape(tri.shape + (1,) * (len(shape) - 2))


# ---------------------------------------------------------------- constructors

def constant(value: Scalar, order: int, nvars: int = 2) -> Jet:
    value = np.asarray(value, dtype=float)
    c = np.zeros((order + 1,) * nvars + value.shape)
    c[(0,) * nvars] = value
    return Jet(c, order, nvars)


def seed_variable(point: Sequence[Scalar], which: int, order: int) -> Jet:
    """Jet of the coordinate function x1 (``which=1``) or x2 at ``point``."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    if order < 0:
        raise ValueError("order must be non-negative")
    x1, x2 = np.broadcast_arrays(*(np.asarray(p, dtype=float) for p in point))
    c = np.zeros((order + 1, order + 1) + x1.shape)
    c[0, 0] = x1 if which == 1 else x2
    if order >= 1:
        if which == 1:
            c[1, 0] = 1.0
        else:
            c[0, 1] = 1.0
    return Jet(c, order, 2)


def seed_univariate(x: Scalar, order: int) -> Jet:
    x = np.asarray(x, dtype=float)
    c = np.zeros((order + 1,) + x.shape)
    c[0] = x
    if order >= 1:
        c[1] = 1.0
    return Jet(c, order, 1)


def embed(j: Jet, axis: int) -> Jet:
    """View a univariate jet in x1 (``axis=0``) or x2 (``axis=1``) as bivariate."""
    if j.nvars != 1:
        raise ValueError("embed expects a univariate jet")
    k = j.order
    c = np.zeros((k + 1, k + 1) + j.batch_shape)
    if axis == 0:
        c[:, 0] = j.coeffs
    else:
        c[0, :] = j.coeffs
    return Jet(c, k, 2)


def outer(f: Jet, g: Jet) -> Jet:
    """Bivariate jet of f(x1) * g(x2) from two univariate jets."""
    k = min(f.order, g.order)
    fc, gc = f.coeffs[:k + 1], g.coeffs[:k + 1]
    c = fc[:, None] * gc[None, :]
    tri = _triangle(k, 2)
    c = c * tri.reshape(tri.shape + (1,) * (c.ndim - 2))
    return Jet(c, k, 2)


def extract(j: Jet, i: int, jdx: int = 0) -> np.ndarray:
    """Return d1^i d2^jdx f at the expansion point (not the normalized coefficient)."""
    if i < 0 or jdx < 0 or i + jdx > j.order:
        raise OrderExceeded(f"derivative ({i}, {jdx}) exceeds jet order {j.order}")
    if j.nvars == 1:
        if jdx:
            raise OrderExceeded("univariate jet has no second variable")
        return j.coeffs[i] * math.factorial(i)
    return j.coeffs[i, jdx] * (math.factorial(i) * math.factorial(jdx))


def arith(op: str, lhs: Jet, rhs) -> Jet:
    ops: Dict[str, Callable] = {
        "add": lambda u, v: u + v,
        "sub": lambda u, v: u - v,
        "mul": lambda u, v: u * v,
        "div": lambda u, v: u / v,
    }
    try:
        return ops[op](lhs, rhs)
    except KeyError:
        raise ValueError(f"unknown arithmetic op {op!r}") from None


# ------------------------------------------------- univariate Taylor sources

def _gbinom(p: float, order: int) -> np.ndarray:
    # generalized binomial coefficients C(p, k), k = 0..order
    out = np.ones(order + 1)
    for k in range(1, order + 1):
        out[k] = out[k - 1] * (p - k + 1) / k
    return out


def _series_reciprocal(d: np.ndarray) -> np.ndarray:
    r = np.zeros_like(d)
    r[0] = 1.0 / d[0]
    for k in range(1, d.shape[0]):
        acc = np.zeros_like(d[0])
        for j in range(1, k + 1):
            acc = acc + d[j] * r[k - j]
        r[k] = -acc * r[0]
    return r


def _riccati(y0: np.ndarray, order: int) -> np.ndarray:
    # Taylor coefficients of y with y' = 1 - y^2 (tanh and coth alike)
    y = np.zeros((order + 1,) + y0.shape)
    y[0] = y0
    for k in range(order):
        sq = np.zeros_like(y0)
        for j in range(k + 1):
            sq = sq + y[j] * y[k - j]
        rhs = (1.0 if k == 0 else 0.0) - sq
        y[k + 1] = rhs / (k + 1)
    return y


def _check_pole(bad: np.ndarray, what: str, kind=PoleError) -> None:
    if np.any(bad):
        raise kind(f"{what}: expansion point sits on a singularity")


def taylor_coefficients(tag: str, t: Scalar, order: int, param: Optional[float] = None) -> np.ndarray:
    """Normalized Taylor coefficients ``f^(k)(t)/k!``, k = 0..order, of an elementary f."""
    t = np.asarray(t, dtype=float)
    k = np.arange(order + 1).reshape((-1,) + (1,) * t.ndim)
    fact = np.array([math.factorial(i) for i in range(order + 1)], dtype=float)
    fact = fact.reshape(k.shape)
    if tag == "exp":
        return np.exp(t) / fact * np.ones_like(k, dtype=float)
    if tag in ("sinh", "cosh"):
        s, c = np.sinh(t), np.cosh(t)
        even, odd = (s, c) if tag == "sinh" else (c, s)
        return np.where(k % 2 == 0, even, odd) / fact
    if tag == "tanh":
        return _riccati(np.tanh(t), order)
    if tag == "coth":
        _check_pole(t == 0, "coth")
        return _riccati(1.0 / np.tanh(t), order)
    if tag == "reciprocal":
        _check_pole(t == 0, "reciprocal", DivisionByZero)
        return (-1.0) ** k * t ** (-(k + 1.0))
    if tag == "log":
        _check_pole(t <= 0, "log")
        with np.errstate(divide="ignore"):
            out = (-1.0) ** (k + 1) / np.where(k == 0, 1, k) / t ** k
        out = np.array(np.broadcast_to(out, (order + 1,) + t.shape))
        out[0] = np.log(t)
        return out
    if tag == "arctan":
        d = np.zeros((order + 1,) + t.shape)
        d[0] = 1.0 + t * t
        if order >= 1:
            d[1] = 2.0 * t
        if order >= 2:
            d[2] = 1.0
        r = _series_reciprocal(d)
        out = np.zeros_like(d)
        out[0] = np.arctan(t)
        for i in range(order):
            out[i + 1] = r[i] / (i + 1)
        return out
    if tag == "power":
        if param is None:
            raise ValueError("power needs an exponent")
        p = float(param)
        coef = _gbinom(p, order).reshape(k.shape)
        if p == int(p) and p >= 0:
            # polynomial: exact zeros beyond degree p, any sign of t allowed
            expo = np.maximum(p - k, 0)
            return np.where(k <= p, coef * t ** expo, 0.0)
        if p == int(p):
            _check_pole(t == 0, "negative integer power")
        else:
            _check_pole(t <= 0, "real power")
        return coef * t ** (p - k)
    raise ValueError(f"unknown elementary function {tag!r}")


ELEMENTARY = ("exp", "sinh", "cosh", "tanh", "coth", "reciprocal", "log", "arctan", "power", "abs_power")


def _compose(coefs: np.ndarray, arg: Jet) -> Jet:
    h = arg.nilpotent()
    K = arg.order
    out = constant(coefs[K], K, arg.nvars)
    for k in range(K - 1, -1, -1):
        out = out * h + coefs[k]
    return out


def lift(tag: str, arg: Jet, param: Optional[float] = None) -> Jet:
    """Jet of ``f(arg)`` for an elementary function named by ``tag``.

    ``abs_power`` evaluates ``|arg|**param`` as ``(s*arg)**param`` with ``s``
    the sign of the value at the expansion point; a zero value is a pole.
    """
    if tag == "abs_power":
        v = arg.value
        _check_pole(v == 0, "abs_power")
        s = np.sign(v)
        return lift("power", arg * s, param)
    if not np.all(np.isfinite(arg.coeffs)):
        raise ValueError("non-finite jet argument")
    return _compose(taylor_coefficients(tag, arg.value, arg.order, param), arg)


def sinh(j: Jet) -> Jet:
    return lift("sinh", j)


def cosh(j: Jet) -> Jet:
    return lift("cosh", j)


def tanh(j: Jet) -> Jet:
    return lift("tanh", j)


def coth(j: Jet) -> Jet:
    return lift("coth", j)


def exp(j: Jet) -> Jet:
    return lift("exp", j)


def log(j: Jet) -> Jet:
    return lift("log", j)


def arctan(j: Jet) -> Jet:
    return lift("arctan", j)


def reciprocal(j: Jet) -> Jet:
    return lift("reciprocal", j)


def power(j: Jet, p: float) -> Jet:
    return lift("power", j, p)


def abs_power(j: Jet, p: float) -> Jet:
    return lift("abs_power", j, p)
