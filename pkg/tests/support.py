"""Shared helpers for the test suite: random expression trees and an
independent high-precision finite-difference oracle."""
from __future__ import annotations

import math

import mpmath
import numpy as np

from scarf2d import jets as J

UNARY = ("sinh", "cosh", "tanh", "arctan", "exp", "log1p2", "pow1p2", "sech", "coth1p2")
BINARY = ("add", "sub", "mul", "div1p2")


def random_expression(rng: np.random.Generator, depth: int = 3):
    """Expression tree over x1, x2 whose every node is analytic on [-1, 1]^2.

    Divisions, logarithms, non-integer powers and coth only ever see
    arguments of the form 1 + e^2, which stay away from their poles.
    """
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.4:
            return ("x1",)
        if r < 0.8:
            return ("x2",)
        return ("const", float(np.round(rng.uniform(-2, 2), 3)))
    if rng.random() < 0.5:
        op = UNARY[rng.integers(len(UNARY))]
        if op == "pow1p2":
            return (op, random_expression(rng, depth - 1), float(np.round(rng.uniform(-2.5, 2.5), 2)))
        return (op, random_expression(rng, depth - 1))
    op = BINARY[rng.integers(len(BINARY))]
    return (op, random_expression(rng, depth - 1), random_expression(rng, depth - 1))


def _eval(node, x1, x2, lib):
    tag = node[0]
    if tag == "x1":
        return x1
    if tag == "x2":
        return x2
    if tag == "const":
        return lib.const(node[1], x1)
    args = [_eval(child, x1, x2, lib) for child in node[1:] if isinstance(child, tuple)]
    if tag == "add":
        return args[0] + args[1]
    if tag == "sub":
        return args[0] - args[1]
    if tag == "mul":
        return args[0] * args[1]
    if tag == "div1p2":
        return args[0] / (args[1] * args[1] + 1)
    if tag == "log1p2":
        return lib.log(args[0] * args[0] + 1)
    if tag == "pow1p2":
        return lib.power(args[0] * args[0] + 1, node[2])
    if tag == "coth1p2":
        return lib.coth(args[0] * args[0] + 1)
    if tag == "sech":
        return lib.reciprocal(lib.cosh(args[0]))
    return getattr(lib, tag)(args[0])


class _JetLib:
    sinh = staticmethod(J.sinh)
    cosh = staticmethod(J.cosh)
    tanh = staticmethod(J.tanh)
    coth = staticmethod(J.coth)
    arctan = staticmethod(J.arctan)
    exp = staticmethod(J.exp)
    log = staticmethod(J.log)
    power = staticmethod(J.power)
    reciprocal = staticmethod(J.reciprocal)

    @staticmethod
    def const(c, like):
        return J.constant(c, like.order, like.nvars)


class _MpLib:
    sinh = staticmethod(mpmath.sinh)
    cosh = staticmethod(mpmath.cosh)
    tanh = staticmethod(mpmath.tanh)
    coth = staticmethod(mpmath.coth)
    arctan = staticmethod(mpmath.atan)
    exp = staticmethod(mpmath.exp)
    log = staticmethod(mpmath.log)
    power = staticmethod(lambda x, p: mpmath.power(x, p))
    reciprocal = staticmethod(lambda x: 1 / x)

    @staticmethod
    def const(c, like):
        return mpmath.mpf(c)


def eval_jet(node, point, order: int) -> J.Jet:
    X1 = J.seed_variable(point, 1, order)
    X2 = J.seed_variable(point, 2, order)
    return _eval(node, X1, X2, _JetLib)


def eval_mp(node, x1, x2):
    return _eval(node, mpmath.mpf(x1), mpmath.mpf(x2), _MpLib)


# central stencils: offsets -> weights for the k-th derivative
STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
}


def fd_coefficients(node, x1: float, x2: float, order: int = 3, h: float = 1e-4, dps: int = 50):
    """Taylor coefficients d^(i+j) f / (i! j!) by tensor-product central differences.

    Evaluated with ``dps`` significant digits so that only the O(h^2)
    truncation error of the stencils remains.
    """
    with mpmath.workdps(dps):
        H = mpmath.mpf(h)
        X1, X2 = mpmath.mpf(x1), mpmath.mpf(x2)
        cache = {}

        def f(a, b):
            if (a, b) not in cache:
                cache[(a, b)] = eval_mp(node, X1 + a * H, X2 + b * H)
            return cache[(a, b)]

        out = {}
        for i in range(order + 1):
            for j in range(order + 1 - i):
                acc = mpmath.mpf(0)
                for a, wa in STENCILS[i].items():
                    for b, wb in STENCILS[j].items():
                        acc += wa * wb * f(a, b)
                out[(i, j)] = float(acc / H ** (i + j)) / (math.factorial(i) * math.factorial(j))
        return out


def jet_matches_fd(node, x1: float, x2: float, rtol: float = 1e-5, order: int = 3):
    """Largest scaled disagreement between the jet and the FD oracle."""
    jet = eval_jet(node, (np.float64(x1), np.float64(x2)), order)
    ref = fd_coefficients(node, x1, x2, order)
    worst = 0.0
    for (i, j), r in ref.items():
        got = float(jet.coeffs[i, j])
        worst = max(worst, abs(got - r) / max(1.0, abs(r)))
    return worst <= rtol, worst


def gaussian_points(rng, count, box=2.0, min_gap=0.3):
    from scarf2d.verify import sample_points

    return sample_points(rng, count, box, min_gap)
