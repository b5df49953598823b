"""One-dimensional Scarf II building blocks.

The potential

    U(x) = [c (2b + 1) sinh x + (c^2 - b^2 - b)] / cosh^2 x

has bound states ``eta_n`` with energies ``-(b - n)^2`` for ``0 <= n < b``,
written with Jacobi polynomials of imaginary argument and complex conjugate
parameters. Both constructions of two-dimensional states reuse these.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jets as J
from .exceptions import IndexOutOfBoundState, RecurrenceBreakdown

__all__ = [
    "ModelParams",
    "potential",
    "potential_jet",
    "jacobi",
    "jacobi_coefficients",
    "eigenvalue",
    "eigenfunction",
    "Eigenfunction1D",
]


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the two-dimensional model.

    ``b`` and ``c`` must be positive. Integer ``b`` is rejected unless
    ``allow_integer_b`` is set, so that ``n < b`` never admits the marginal
    level with zero energy.
    """

    a: float
    b: float
    c: float
    allow_integer_b: bool = False

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"parameter {name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.b <= 0 or self.c <= 0:
            raise ValueError(f"need b > 0 and c > 0, got b={self.b}, c={self.c}")
        if not self.allow_integer_b and float(self.b).is_integer():
            raise ValueError(f"b must not be an integer (got {self.b}); pass allow_integer_b=True to override")

    def shifted(self, da: float = 0.0, db: float = 0.0) -> "ModelParams":
        return dataclasses.replace(self, a=self.a + da, b=self.b + db)

    @property
    def branch(self) -> Optional[str]:
        """``"exact"`` for a = -k (k >= 1), ``"quasi"`` for a > -1/2, else None."""
        if self.a <= -1 and float(self.a).is_integer():
            return "exact"
        if self.a > -0.5:
            return "quasi"
        return None

    @property
    def levels(self) -> int:
        """Number of one-dimensional bound states (indices n with n < b)."""
        return int(math.ceil(self.b))

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c}


def potential(x, b: float, c: float):
    x = np.asarray(x, dtype=float)
    return (c * (2 * b + 1) * np.sinh(x) + (c * c - b * b - b)) / np.cosh(x) ** 2


def potential_jet(x: J.Jet, b: float, c: float) -> J.Jet:
    """Jet of U at the expansion point of ``x`` (any number of variables)."""
    return (J.sinh(x) * (c * (2 * b + 1)) + (c * c - b * b - b)) * J.power(J.cosh(x), -2)


def _recurrence_coefficients(n: int, alpha: complex, beta: complex):
    s = 2 * n + alpha + beta
    a_n = 2 * n * (n + alpha + beta) * (s - 2)
    if a_n == 0:
        raise RecurrenceBreakdown(
            f"Jacobi recurrence breaks down at degree {n} for alpha={alpha}, beta={beta}"
        )
    b_lin = (s - 1) * s * (s - 2)
    b_const = (s - 1) * (alpha * alpha - beta * beta)
    c_n = 2 * (n + alpha - 1) * (n + beta - 1) * s
    return a_n, b_lin, b_const, c_n


def jacobi(n: int, alpha: complex, beta: complex, z) -> complex:
    """P_n^(alpha, beta)(z) by the three-term recurrence, in complex arithmetic."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    z = np.asarray(z, dtype=complex)
    prev = np.ones_like(z)
    if n == 0:
        return prev if prev.ndim else complex(prev)
    cur = (alpha + 1) + (alpha + beta + 2) * (z - 1) / 2
    for k in range(2, n + 1):
        a_k, b_lin, b_const, c_k = _recurrence_coefficients(k, alpha, beta)
        prev, cur = cur, ((b_lin * z + b_const) * cur - c_k * prev) / a_k
    return cur if cur.ndim else complex(cur)


def jacobi_coefficients(n: int, alpha: complex, beta: complex) -> np.ndarray:
    """Monomial coefficients (ascending powers of z) of P_n^(alpha, beta)."""
    prev = np.zeros(n + 1, dtype=complex)
    prev[0] = 1.0
    if n == 0:
        return prev
    cur = np.zeros(n + 1, dtype=complex)
    cur[0] = (alpha + 1) - (alpha + beta + 2) / 2
    cur[1] = (alpha + beta + 2) / 2
    for k in range(2, n + 1):
        a_k, b_lin, b_const, c_k = _recurrence_coefficients(k, alpha, beta)
        shifted = np.roll(cur, 1)
        shifted[0] = 0.0
        prev, cur = cur, (b_lin * shifted + b_const * cur - c_k * prev) / a_k
    return cur


def eigenvalue(n: int, b: float) -> float:
    if n < 0 or n >= b:
        raise IndexOutOfBoundState(f"level n={n} is not bound for b={b} (need 0 <= n < b)")
    return -((b - n) ** 2)


@dataclass(frozen=True)
class Eigenfunction1D:
    """Bound state ``eta_n`` of the 1D Scarf II potential.

    Not normalized. The polynomial factor carries the phase ``i**-n`` so that
    ``poly`` holds the real coefficients of ``i**-n P_n(i s)`` in powers of
    ``s = sinh x``.
    """

    n: int
    b: float
    c: float
    gamma: complex
    beta_j: complex
    poly: np.ndarray

    @property
    def energy(self) -> float:
        return eigenvalue(self.n, self.b)

    def jet(self, x, order: int) -> J.Jet:
        X = J.seed_univariate(x, order)
        s = J.sinh(X)
        envelope = J.power(J.cosh(X), -self.b) * J.exp(J.arctan(s) * (-self.c))
        p = J.constant(self.poly[-1] * np.ones(np.shape(x)), order, 1)
        for q in self.poly[-2::-1]:
            p = p * s + q
        return envelope * p

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = np.sinh(x)
        envelope = np.cosh(x) ** (-self.b) * np.exp(-self.c * np.arctan(s))
        return envelope * np.polynomial.polynomial.polyval(s, self.poly)


def eigenfunction(n: int, b: float, c: float) -> Eigenfunction1D:
    eigenvalue(n, b)  # bounds check
    gamma = complex(-(b + 0.5), -c)
    beta_j = gamma.conjugate()
    p = jacobi_coefficients(n, gamma, beta_j)
    phased = p * (1j ** (np.arange(n + 1) - n))
    scale = max(1.0, float(np.max(np.abs(phased))))
    if np.max(np.abs(phased.imag)) > 1e-10 * scale:
        raise RecurrenceBreakdown("phase-fixed Jacobi polynomial is not real")
    return Eigenfunction1D(n, float(b), float(c), gamma, beta_j, phased.real.copy())
