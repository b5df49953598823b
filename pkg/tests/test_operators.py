import math

import mpmath
import numpy as np
import pytest
from scipy.special import roots_legendre

from scarf2d import jets as J
from scarf2d.exceptions import PoleError
from scarf2d.operators import (
    Composition,
    DiffOp,
    WaveFunction,
    apply,
    compose,
    formal_adjoint,
    gaussian,
    hamiltonian,
    identity,
    supercharge,
    swap_point,
    symmetry_operator,
)
from scarf2d.scarf1d import ModelParams, eigenfunction, eigenvalue
from scarf2d.verify import sample_points

P = ModelParams(1.3, 4.5, 0.7)


def mp_gaussian(mu1, mu2, s):
    return lambda x1, x2: mpmath.exp(-((x1 - mu1) ** 2 + (x2 - mu2) ** 2) / (2 * s * s))


def mp_U(x, b, c):
    return (c * (2 * b + 1) * mpmath.sinh(x) + (c * c - b * b - b)) / mpmath.cosh(x) ** 2


# --------------------------------------------------------- oracle checks

def test_hamiltonian_matches_mpmath_finite_differences():
    a, b, c = P.a, P.b, P.c
    f = mp_gaussian(0.3, -0.6, 0.8)
    psi = gaussian((0.3, -0.6), 0.8)
    H = hamiltonian("H1", P)
    with mpmath.workdps(30):
        for x1, x2 in [(0.1, -1.0), (1.2, 0.4), (-0.7, 0.9)]:
            X1, X2 = mpmath.mpf(x1), mpmath.mpf(x2)
            lap = mpmath.diff(f, (X1, X2), (2, 0)) + mpmath.diff(f, (X1, X2), (0, 2))
            mix = 1 / mpmath.cosh((X1 + X2) / 2) ** 2 - 1 / mpmath.sinh((X1 - X2) / 2) ** 2
            V = -a * (a - 1) / 2 * mix + mp_U(X1, b, c) + mp_U(X2, b, c)
            want = float(-lap + V * f(X1, X2))
            got = float(apply(H, psi, (x1, x2)).value)
            assert got == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_qplus_matches_light_cone_form():
    # oracle in x+- = x1 +- x2 coordinates, differentiated by mpmath
    a, b, c = P.a, P.b, P.c
    f = mp_gaussian(-0.2, 0.5, 0.9)
    psi = gaussian((-0.2, 0.5), 0.9)
    Q = supercharge("Qplus", P)

    def g(xp, xm):
        return f((xp + xm) / 2, (xp - xm) / 2)

    with mpmath.workdps(30):
        for x1, x2 in [(0.4, -0.8), (1.0, 0.2), (-1.1, 0.3)]:
            xp, xm = mpmath.mpf(x1 + x2), mpmath.mpf(x1 - x2)
            T, C = mpmath.tanh(xp / 2), mpmath.coth(xm / 2)
            want = (4 * mpmath.diff(g, (xp, xm), (1, 1)) + 2 * a * T * mpmath.diff(g, (xp, xm), (0, 1))
                    + 2 * a * C * mpmath.diff(g, (xp, xm), (1, 0))
                    + (a * a * T * C - mp_U(mpmath.mpf(x1), b, c) + mp_U(mpmath.mpf(x2), b, c)) * g(xp, xm))
            got = float(apply(Q, psi, (x1, x2)).value)
            assert got == pytest.approx(float(want), rel=1e-10, abs=1e-12)


def test_qtilde_matches_written_form():
    a, b, c = P.a, P.b, P.c
    f = mp_gaussian(0.5, 0.1, 0.7)
    psi = gaussian((0.5, 0.1), 0.7)
    Q = supercharge("Qtilde_plus", P)
    with mpmath.workdps(30):
        for x1, x2 in [(0.9, -0.3), (-0.4, 0.6)]:
            X1, X2 = mpmath.mpf(x1), mpmath.mpf(x2)
            f1 = b * mpmath.tanh(X1) + c / mpmath.cosh(X1)
            f2 = b * mpmath.tanh(X2) + c / mpmath.cosh(X2)
            extra = a * (a - 1) / 4 * (1 / mpmath.cosh((X1 + X2) / 2) ** 2 + 1 / mpmath.sinh((X1 - X2) / 2) ** 2)
            want = (mpmath.diff(f, (X1, X2), (1, 1)) - f1 * mpmath.diff(f, (X1, X2), (0, 1))
                    - f2 * mpmath.diff(f, (X1, X2), (1, 0)) + (f1 * f2 + extra) * f(X1, X2))
            assert float(apply(Q, psi, (x1, x2)).value) == pytest.approx(float(want), rel=1e-10, abs=1e-12)


def _gl_grid(lo1, hi1, lo2, hi2, n):
    x, w = roots_legendre(n)
    u = lo1 + (hi1 - lo1) * (x + 1) / 2
    v = lo2 + (hi2 - lo2) * (x + 1) / 2
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(w * (hi1 - lo1) / 2, w * (hi2 - lo2) / 2)
    return U, V, W


@pytest.mark.parametrize("which", ["Qplus", "Qtilde_plus"])
def test_adjoint_by_quadrature(which):
    # Gaussians concentrated far from the diagonal, where the coefficients are singular
    f = gaussian((1.2, -1.0), 0.2)
    g = gaussian((1.0, -1.3), 0.25)
    Qp, Qm = supercharge(which, P), supercharge(which.replace("plus", "minus"), P)
    U, V, W = _gl_grid(-0.5, 2.7, -2.8, 0.5, 120)
    pt = (U.ravel(), V.ravel())
    lhs = np.sum(W.ravel() * Qp.apply(f, pt).value * g(pt))
    rhs = np.sum(W.ravel() * f(pt) * Qm.apply(g, pt).value)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_formal_adjoint_of_constant_first_order_term():
    op = DiffOp(1, lambda p, k: {(1, 0): 2.5}, [(1, 0)])
    adj = formal_adjoint(op)
    coeffs = adj.coefficients((np.array([0.3]), np.array([0.1])), 0)
    assert coeffs[(1, 0)].value[0] == pytest.approx(-2.5)


def test_separable_hamiltonian_at_a_minus_one():
    p = ModelParams(-1.0, 3.5, 1.0)
    e0, e2 = eigenfunction(0, 3.5, 1.0), eigenfunction(2, 3.5, 1.0)
    psi = WaveFunction(lambda pt, k: J.outer(e0.jet(pt[0], k), e2.jet(pt[1], k)))
    x1, x2 = sample_points(np.random.default_rng(0), 15)
    got = apply(hamiltonian("H2", p), psi, (x1, x2)).value
    np.testing.assert_allclose(got, (eigenvalue(0, 3.5) + eigenvalue(2, 3.5)) * psi((x1, x2)), rtol=1e-10, atol=1e-14)


def test_potential_on_light_cone_point_two_ways():
    a = P.a
    H = hamiltonian("H1", P)
    coeffs = H.coefficients((np.array(1.0), np.array(-1.0)), 0)
    from scarf2d.scarf1d import potential
    want = potential(1.0, P.b, P.c) + potential(-1.0, P.b, P.c) - a * (a - 1) / 2 * (1 - 1 / math.sinh(1.0) ** 2)
    assert float(coeffs[(0, 0)].value) == pytest.approx(want, rel=1e-12)


# ------------------------------------------------------ structural checks

def test_leading_symbols():
    pt = (np.array(0.7), np.array(-0.2))
    for which in ("H1", "H2", "H2tilde"):
        c = hamiltonian(which, P).coefficients(pt, 0)
        assert c[(2, 0)] == -1.0 and c[(0, 2)] == -1.0
    q = supercharge("Qplus", P).coefficients(pt, 0)
    assert q[(2, 0)] == 1.0 and q[(0, 2)] == -1.0
    assert supercharge("Qtilde_plus", P).coefficients(pt, 0)[(1, 1)] == 1.0


def test_qplus_light_cone_coefficient_vanishes_on_x_plus_zero():
    # with tanh(x+/2) = 0 only the coth d+ term is left, and d+ weighs d1 and d2 equally
    c = supercharge("Qplus", P).coefficients((np.array(0.6), np.array(-0.6)), 0)
    assert float(c[(1, 0)].value) == pytest.approx(float(c[(0, 1)].value))
    assert float(c[(1, 0)].value) == pytest.approx(P.a / math.tanh(0.6))


def test_orders():
    assert symmetry_operator("R1", P).order == 4
    assert compose(hamiltonian("H1", P), supercharge("Qplus", P)).order == 4


def _random_gaussians(rng, count):
    return [gaussian(tuple(rng.uniform(-1.5, 1.5, 2)), rng.uniform(0.6, 1.2)) for _ in range(count)]


def test_adjoint_is_an_involution():
    rng = np.random.default_rng(4)
    Q = supercharge("Qplus", P)
    QQ = formal_adjoint(formal_adjoint(Q))
    x1, x2 = sample_points(rng, 20)
    for psi in _random_gaussians(rng, 5):
        a, b = Q.apply(psi, (x1, x2)).value, QQ.apply(psi, (x1, x2)).value
        assert np.max(np.abs(a - b)) <= 1e-11 * max(1.0, np.max(np.abs(a)))


def test_composition_is_associative_and_identity_is_neutral():
    rng = np.random.default_rng(5)
    A, B, C = hamiltonian("H1", P), supercharge("Qplus", P), supercharge("Qtilde_minus", P)
    x1, x2 = sample_points(rng, 20)
    for psi in _random_gaussians(rng, 3):
        l = Composition(Composition(A, B), C).apply(psi, (x1, x2)).value
        r = Composition(A, Composition(B, C)).apply(psi, (x1, x2)).value
        assert np.max(np.abs(l - r)) <= 1e-11 * max(1.0, np.max(np.abs(l)))
        np.testing.assert_allclose(compose(A, identity()).apply(psi, (x1, x2)).value,
                                   A.apply(psi, (x1, x2)).value, rtol=1e-14)


def test_linearity():
    rng = np.random.default_rng(6)
    f, g = _random_gaussians(rng, 2)
    x1, x2 = sample_points(rng, 10)
    h = WaveFunction(lambda p, k: f.jet(p, k) * 2.0 - g.jet(p, k) * 0.5)
    R = symmetry_operator("R1", P)
    lhs = R.apply(h, (x1, x2)).value
    rhs = 2.0 * R.apply(f, (x1, x2)).value - 0.5 * R.apply(g, (x1, x2)).value
    np.testing.assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-11)


def test_output_jet_order():
    psi = gaussian((0.0, 0.5), 1.0)
    out = apply(hamiltonian("H1", P), psi, (0.3, -0.9), 2)
    assert out.order == 2
    h = 1e-5
    v = lambda x1: apply(hamiltonian("H1", P), psi, (x1, -0.9)).value
    assert float(J.extract(out, 1, 0)) == pytest.approx(float((v(0.3 + h) - v(0.3 - h)) / (2 * h)), rel=1e-6)


def test_pole_on_diagonal():
    psi = gaussian((0.0, 0.0), 1.0)
    with pytest.raises(PoleError):
        apply(supercharge("Qplus", P), psi, (0.4, 0.4))
    with pytest.raises(PoleError):
        apply(hamiltonian("H1", P), psi, (0.4, 0.4))


def test_swap_point():
    assert swap_point((1.0, 2.0))[0] == 2.0


def test_unknown_operator_names():
    with pytest.raises(ValueError):
        hamiltonian("H3", P)
    with pytest.raises(ValueError):
        supercharge("Q", P)
    with pytest.raises(ValueError):
        symmetry_operator("R3", P)
