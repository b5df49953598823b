"""Differential operators of the two-dimensional model and their exact action.

Every operator is kept in (x1, x2) coordinates. Terms written with
``d+- = (d1 +- d2) / 2`` are converted on construction, so
``4 d+ d- = d1^2 - d2^2``.

Operators act on :class:`WaveFunction` objects pointwise through jets:
applying an order-``d`` operator at jet order ``K`` asks the wave function
for a jet of order ``K + d``. Products of operators are never expanded;
a :class:`Composition` simply wraps the inner action as a new wave function.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import jets as J
from .scarf1d import ModelParams, potential_jet

__all__ = [
    "WaveFunction",
    "Operator",
    "DiffOp",
    "Composition",
    "LinearCombination",
    "identity",
    "hamiltonian",
    "supercharge",
    "formal_adjoint",
    "apply",
    "compose",
    "symmetry_operator",
    "alpha_shift",
    "beta_shift",
    "beta_shift_printed",
    "gaussian",
    "swap_point",
]

Point = Tuple[np.ndarray, np.ndarray]
Coefficients = Dict[Tuple[int, int], Union[J.Jet, float]]


def _as_point(point) -> Point:
    x1, x2 = np.broadcast_arrays(*(np.asarray(p, dtype=float) for p in point))
    return x1, x2


def swap_point(point) -> Point:
    x1, x2 = _as_point(point)
    return x2, x1


@dataclass(frozen=True)
class WaveFunction:
    """A function of (x1, x2) that reports jets of any order at any point.

    ``symmetry`` is +1 / -1 when the function is even / odd under
    ``x1 <-> x2`` and 0 when no symmetry is claimed. ``domain`` is
    ``"plane"`` or ``"off_diagonal"`` (the line x1 = x2 excluded).
    """

    evaluator: Callable[[Point, int], J.Jet]
    label: str = "psi"
    params: Optional[ModelParams] = None
    indices: Mapping[str, int] = field(default_factory=dict)
    branch: Optional[str] = None
    symmetry: int = 0
    domain: str = "plane"
    energy: Optional[float] = None

    def jet(self, point, order: int) -> J.Jet:
        return self.evaluator(_as_point(point), order)

    def __call__(self, point) -> np.ndarray:
        return self.jet(point, 0).value

    def scaled(self, factor: float) -> "WaveFunction":
        ev = self.evaluator
        return _replace(self, evaluator=lambda p, k: ev(p, k) * factor)

    def meta(self) -> dict:
        out = {
            "label": self.label,
            "indices": dict(self.indices),
            "branch": self.branch,
            "symmetry": self.symmetry,
            "domain": self.domain,
            "energy": self.energy,
        }
        if self.params is not None:
            out["params"] = self.params.as_dict()
        return out


def _replace(wf: WaveFunction, **changes) -> WaveFunction:
    return dataclasses.replace(wf, **changes)


class Operator:
    """Linear differential operator acting on wave functions via jets."""

    order: int
    label: str
    params: Optional[ModelParams]

    def apply(self, psi: WaveFunction, point, order: int = 0) -> J.Jet:
        raise NotImplementedError

    def adjoint(self) -> "Operator":
        raise NotImplementedError

    def on(self, psi: WaveFunction, label: Optional[str] = None, **meta) -> WaveFunction:
        """The wave function ``self psi``, evaluated lazily."""
        op = self

        def evaluator(point, k):
            return op.apply(psi, point, k)

        domain = "off_diagonal" if (psi.domain == "off_diagonal" or _singular(op)) else "plane"
        return WaveFunction(evaluator, label or f"{op.label}({psi.label})", domain=domain, **meta)

    def __matmul__(self, other: "Operator") -> "Composition":
        return Composition(self, other)

    def __add__(self, other) -> "LinearCombination":
        return LinearCombination.of(self) + other

    def __radd__(self, other):
        return self + other

    def __sub__(self, other) -> "LinearCombination":
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __mul__(self, w: float) -> "LinearCombination":
        return LinearCombination([(float(w), self)])

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label} order={self.order}>"


def _singular(op: Operator) -> bool:
    return getattr(op, "singular", False)


class DiffOp(Operator):
    """Finite sum ``sum coeff_ij(x) d1^i d2^j`` in explicit form.

    ``coefficients(point, order)`` returns a mapping ``(i, j) -> jet`` (plain
    floats allowed for constant coefficients) at the requested jet order.
    """

    def __init__(
        self,
        order: int,
        coefficients: Callable[[Point, int], Coefficients],
        terms: Iterable[Tuple[int, int]],
        params: Optional[ModelParams] = None,
        label: str = "op",
        singular: bool = False,
    ):
        self.order = int(order)
        self._coefficients = coefficients
        self.terms = tuple(sorted(set(terms)))
        if any(i + j > self.order for i, j in self.terms):
            raise ValueError("term exceeds operator order")
        self.params = params
        self.label = label
        self.singular = singular

    @classmethod
    def from_expression(cls, order, fn, terms, **kw) -> "DiffOp":
        """Build from ``fn(X1, X2) -> {(i, j): coeff}`` written in jet arithmetic."""

        def coefficients(point, k):
            return fn(J.seed_variable(point, 1, k), J.seed_variable(point, 2, k))

        return cls(order, coefficients, terms, **kw)

    def coefficients(self, point, order: int) -> Coefficients:
        return self._coefficients(_as_point(point), order)

    def apply(self, psi: WaveFunction, point, order: int = 0) -> J.Jet:
        point = _as_point(point)
        f = psi.jet(point, order + self.order)
        coeffs = self.coefficients(point, order)
        out = None
        for (i, j) in self.terms:
            c = coeffs.get((i, j), 0.0)
            d = f.derivative(i, j).truncate(order)
            term = d * c
            out = term if out is None else out + term
        if out is None:
            return J.constant(np.zeros(point[0].shape), order)
        return out

    def adjoint(self) -> "DiffOp":
        return formal_adjoint(self)


class Composition(Operator):
    def __init__(self, outer: Operator, inner: Operator, label: Optional[str] = None):
        self.outer = outer
        self.inner = inner
        self.order = outer.order + inner.order
        self.params = outer.params
        self.label = label or f"{outer.label}*{inner.label}"
        self.singular = _singular(outer) or _singular(inner)

    def apply(self, psi: WaveFunction, point, order: int = 0) -> J.Jet:
        inner = self.inner

        def evaluator(p, k):
            return inner.apply(psi, p, k)

        return self.outer.apply(WaveFunction(evaluator, "tmp"), point, order)

    def adjoint(self) -> "Composition":
        return Composition(self.inner.adjoint(), self.outer.adjoint())


class LinearCombination(Operator):
    """``sum w_k A_k`` with scalar weights; a bare number stands for w * identity."""

    def __init__(self, terms: Sequence[Tuple[float, Operator]], label: Optional[str] = None):
        self.terms = list(terms)
        self.order = max((op.order for _, op in self.terms), default=0)
        self.params = next((op.params for _, op in self.terms if op.params is not None), None)
        self.label = label or "+".join(f"{w:g}*{op.label}" for w, op in self.terms)
        self.singular = any(_singular(op) for _, op in self.terms)

    @classmethod
    def of(cls, op: Operator) -> "LinearCombination":
        if isinstance(op, LinearCombination):
            return op
        return cls([(1.0, op)])

    def __add__(self, other) -> "LinearCombination":
        if isinstance(other, Operator):
            return LinearCombination(self.terms + LinearCombination.of(other).terms)
        return LinearCombination(self.terms + [(float(other), identity())])

    def __mul__(self, w: float) -> "LinearCombination":
        return LinearCombination([(float(w) * v, op) for v, op in self.terms])

    __rmul__ = __mul__

    def apply(self, psi: WaveFunction, point, order: int = 0) -> J.Jet:
        out = None
        for w, op in self.terms:
            term = op.apply(psi, point, order) * w
            out = term if out is None else out + term
        return out

    def adjoint(self) -> "LinearCombination":
        return LinearCombination([(w, op.adjoint()) for w, op in self.terms])

    def parts(self, psi: WaveFunction, point, order: int = 0) -> List[J.Jet]:
        """Each weighted term ``w_k A_k psi`` separately (for cancellation-aware scales)."""
        return [op.apply(psi, point, order) * w for w, op in self.terms]


def identity() -> DiffOp:
    return DiffOp(0, lambda p, k: {(0, 0): 1.0}, [(0, 0)], label="1")


def apply(op: Operator, psi: WaveFunction, point, out_order: int = 0) -> J.Jet:
    return op.apply(psi, point, out_order)


def compose(outer: Operator, inner: Operator) -> Composition:
    return Composition(outer, inner)


def formal_adjoint(op: Operator) -> Operator:
    """Formal L2 adjoint: sum (-1)^(i+j) d1^i d2^j (coeff .), in standard form."""
    if not isinstance(op, DiffOp):
        return op.adjoint()
    d = op.order
    new_terms = sorted({(p, q) for (i, j) in op.terms for p in range(i + 1) for q in range(j + 1)})

    def coefficients(point, k):
        raw = op.coefficients(point, k + d)
        out: Dict[Tuple[int, int], J.Jet] = {}
        for (i, j) in op.terms:
            c = raw.get((i, j), 0.0)
            if not isinstance(c, J.Jet):
                c = J.constant(np.full(point[0].shape, float(c)), k + d)
            sign = (-1) ** (i + j)
            for p in range(i + 1):
                for q in range(j + 1):
                    w = sign * comb(i, p) * comb(j, q)
                    dc = c.derivative(i - p, j - q).truncate(k) * w
                    out[(p, q)] = dc if (p, q) not in out else out[(p, q)] + dc
        return out

    label = op.label[:-1] + "-" if op.label.endswith("+") else f"({op.label})^+"
    return DiffOp(d, coefficients, new_terms, params=op.params, label=label, singular=op.singular)


# --------------------------------------------------------------- the model

def _mixing(X1: J.Jet, X2: J.Jet):
    """(sech^2(x+/2), csch^2(x-/2))."""
    half_plus = (X1 + X2) * 0.5
    half_minus = (X1 - X2) * 0.5
    return J.power(J.cosh(half_plus), -2), J.power(J.sinh(half_minus), -2)


def _hamiltonian_expr(mix_coupling: float, b_eff: float, c: float):
    def fn(X1, X2):
        V = potential_jet(X1, b_eff, c) + potential_jet(X2, b_eff, c)
        if mix_coupling != 0.0:
            sech2, csch2 = _mixing(X1, X2)
            V = V - (sech2 - csch2) * (mix_coupling / 2.0)
        return {(2, 0): -1.0, (0, 2): -1.0, (0, 0): V}

    return fn


def hamiltonian(which: str, p: ModelParams) -> DiffOp:
    """``H1``, ``H2`` or ``H2tilde`` as explicit second-order operators.

    ``H1`` and ``H2`` carry the mixing coupling a(a - 1) and a(a + 1). The
    partner in the b-ladder, ``H2tilde``, keeps a(a - 1) and lowers b by one
    in the one-dimensional terms. ``H1tilde`` is ``H1`` itself.
    """
    a, b, c = p.a, p.b, p.c
    if which in ("H1", "H1tilde"):
        mix, b_eff = a * (a - 1), b
    elif which == "H2":
        mix, b_eff = a * (a + 1), b
    elif which == "H2tilde":
        mix, b_eff = a * (a - 1), b - 1
    else:
        raise ValueError(f"unknown Hamiltonian {which!r}")
    return DiffOp.from_expression(
        2,
        _hamiltonian_expr(mix, b_eff, c),
        [(2, 0), (0, 2), (0, 0)],
        params=p,
        label=f"{which}(a={a:g},b={b:g})",
        singular=mix != 0.0,
    )


def _qplus_expr(a: float, b: float, c: float):
    def fn(X1, X2):
        T = J.tanh((X1 + X2) * 0.5)
        C = J.coth((X1 - X2) * 0.5)
        V = T * C * (a * a) - potential_jet(X1, b, c) + potential_jet(X2, b, c)
        return {
            (2, 0): 1.0,
            (0, 2): -1.0,
            (1, 0): (T + C) * a,
            (0, 1): (C - T) * a,
            (0, 0): V,
        }

    return fn


def _qtilde_expr(a: float, b: float, c: float, sign: int):
    def fn(X1, X2):
        f1 = J.tanh(X1) * b + J.reciprocal(J.cosh(X1)) * c
        f2 = J.tanh(X2) * b + J.reciprocal(J.cosh(X2)) * c
        sech2, csch2 = _mixing(X1, X2)
        V = f1 * f2 + (sech2 + csch2) * (a * (a - 1) / 4.0)
        return {(1, 1): 1.0, (0, 1): f1 * (-sign), (1, 0): f2 * (-sign), (0, 0): V}

    return fn


def supercharge(which: str, p: ModelParams) -> Operator:
    """``Qplus``/``Qminus`` (Lorentz leading part) or ``Qtilde_plus``/``Qtilde_minus``.

    The minus operators are formal adjoints of the plus operators.
    """
    a, b, c = p.a, p.b, p.c
    tag = f"(a={a:g},b={b:g})"
    if which in ("Qplus", "Qminus"):
        op = DiffOp.from_expression(
            2, _qplus_expr(a, b, c), [(2, 0), (0, 2), (1, 0), (0, 1), (0, 0)],
            params=p, label=f"Q{tag}+", singular=True,
        )
    elif which in ("Qtilde_plus", "Qtilde_minus"):
        op = DiffOp.from_expression(
            2, _qtilde_expr(a, b, c, +1), [(1, 1), (0, 1), (1, 0), (0, 0)],
            params=p, label=f"Qt{tag}+", singular=True,
        )
    else:
        raise ValueError(f"unknown supercharge {which!r}")
    return formal_adjoint(op) if which.endswith("minus") else op


def symmetry_operator(which: str, p: ModelParams) -> Composition:
    """Fourth-order symmetry operators built from supercharge products.

    ``R1 = Q+ Q-`` and ``Rt1 = Qt+ Qt-`` commute with H1; ``R2 = Q- Q+``
    and ``Rt2 = Qt- Qt+`` are the partner products.
    """
    if which in ("R1", "R2"):
        plus, minus = supercharge("Qplus", p), supercharge("Qminus", p)
    elif which in ("Rt1", "Rt2"):
        plus, minus = supercharge("Qtilde_plus", p), supercharge("Qtilde_minus", p)
    else:
        raise ValueError(f"unknown symmetry operator {which!r}")
    tag = f"(a={p.a:g},b={p.b:g})"
    if which.endswith("1"):
        return Composition(plus, minus, label=f"{which}{tag}")
    return Composition(minus, plus, label=f"{which}{tag}")


def alpha_shift(a: float) -> float:
    return 2.0 * (2.0 * a - 1.0)


def beta_shift(a: float) -> float:
    """Constant in R1(a) = R2(a - 1) + alpha(a) H1(a) + beta(a).

    Measured against the operator identity itself; differs from the
    literature value by 4 (2a - 1), see :func:`beta_shift_printed`.
    """
    return (2.0 * a - 1.0) * (2.0 * a * a - 2.0 * a + 1.0)


def beta_shift_printed(a: float) -> float:
    """The literature value (2a - 1)(2a^2 - 2a - 3); kept for comparison reports."""
    return (2.0 * a - 1.0) * (2.0 * a * a - 2.0 * a - 3.0)


def gaussian(center, sigma, label: str = "gauss") -> WaveFunction:
    """exp(-|x - center|^2 / (2 sigma^2)); center and sigma may be batched."""
    mu1, mu2 = (np.asarray(m, dtype=float) for m in center)
    sigma = np.asarray(sigma, dtype=float)

    def evaluator(point, k):
        X1 = J.seed_variable(point, 1, k)
        X2 = J.seed_variable(point, 2, k)
        d1, d2 = X1 - mu1, X2 - mu2
        return J.exp((d1 * d1 + d2 * d2) * (-0.5 / sigma ** 2))

    return WaveFunction(evaluator, label)
