"""Analytic wave functions and spectra of both solvable regimes.

Exact regime, a = -k (k >= 1): the partner Hamiltonian at a = -1 separates,
its antisymmetric product states are pushed through a ladder of ``k``
supercharges.

Quasi-exact regime, a > -1/2: zero modes of ``Q-`` span a subspace that
``H1`` maps into itself with a triangular matrix. Back-substitution gives the
"principal" states; ladders of ``Q+`` (shifting a) and ``Qt+`` (shifting b)
generate the rest.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.stats import qmc

from . import jets as J
from .exceptions import (
    ChainDepthExceeded,
    DegenerateAntisymmetric,
    IllConditioned,
    IndexOutOfBoundState,
    RegionError,
    ResonanceError,
    SelectionRuleViolated,
)
from .operators import WaveFunction, hamiltonian, supercharge
from .scarf1d import ModelParams, eigenfunction, eigenvalue

__all__ = [
    "CMatrix",
    "SpectrumEntry",
    "CollocationConfig",
    "separable_state",
    "exact_branch_state",
    "exact_branch_energy",
    "exact_branch_spectrum",
    "gauge_factor",
    "zero_mode",
    "c_matrix",
    "diagonal_energy",
    "quasi_energy",
    "principal_state",
    "chain_state",
    "quasi_exact_spectrum",
    "MAX_CHAIN_DEPTH",
]

MAX_CHAIN_DEPTH = 4
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class SpectrumEntry:
    branch: str
    indices: Tuple[int, ...]
    energy: float
    params: ModelParams
    normalizable: Optional[bool] = None
    degenerate: bool = False

    def as_dict(self) -> dict:
        names = ("n", "m") if len(self.indices) == 2 else ("n", "m", "M")
        return {
            "branch": self.branch,
            "indices": dict(zip(names, map(int, self.indices))),
            "energy": float(self.energy),
            "params": self.params.as_dict(),
            "normalizable": self.normalizable,
            "degenerate": self.degenerate,
        }


# ------------------------------------------------------------ exact regime

def _eta_jets(levels: Sequence[int], b: float, c: float, x, order: int) -> Dict[int, J.Jet]:
    return {n: eigenfunction(n, b, c).jet(x, order) for n in set(levels)}


def separable_state(n: int, m: int, parity: int, b: float, c: float) -> WaveFunction:
    """eta_n(x1) eta_m(x2) +- eta_m(x1) eta_n(x2), an eigenfunction of H2 at a = -1."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    if parity == -1 and n == m:
        raise DegenerateAntisymmetric(f"antisymmetric combination with n = m = {n} vanishes")
    energy = eigenvalue(n, b) + eigenvalue(m, b)

    def evaluator(point, k):
        x1, x2 = point
        e1 = _eta_jets((n, m), b, c, x1, k)
        e2 = _eta_jets((n, m), b, c, x2, k)
        return J.outer(e1[n], e2[m]) + J.outer(e1[m], e2[n]) * float(parity)

    sign = "+" if parity == 1 else "-"
    return WaveFunction(
        evaluator,
        label=f"Psi2{sign}[{n},{m}]",
        params=ModelParams(-1.0, b, c, allow_integer_b=True),
        indices={"n": n, "m": m},
        branch="exact",
        symmetry=parity,
        domain="plane",
        energy=energy,
    )


def exact_branch_energy(n: int, m: int, b: float) -> float:
    return eigenvalue(n, b) + eigenvalue(m, b)


def _exact_k(p: ModelParams) -> int:
    if not (p.a <= -1 and float(p.a).is_integer()):
        raise RegionError(f"exact regime needs a = -k with integer k >= 1, got a = {p.a}")
    return int(-p.a)


def exact_branch_state(k: int, n: int, m: int, p: ModelParams) -> WaveFunction:
    """Q+(-k) ... Q+(-1) applied to the antisymmetric separable state.

    Each ``Q+`` is odd under x1 <-> x2, so the result is symmetric for odd
    ``k`` and antisymmetric for even ``k``.
    """
    if k < 1 or _exact_k(p) != k:
        raise RegionError(f"exact state with k={k} needs a = -{k}, got a = {p.a}")
    eigenvalue(n, p.b), eigenvalue(m, p.b)
    if abs(n - m) <= k:
        raise SelectionRuleViolated(f"need |n - m| > {k}, got n={n}, m={m}")
    state = separable_state(n, m, -1, p.b, p.c)
    for j in range(1, k + 1):
        state = supercharge("Qplus", dataclasses.replace(p, a=-float(j))).on(state)
    return WaveFunction(
        state.evaluator,
        label=f"Psi1[k={k};{n},{m}]",
        params=p,
        indices={"n": n, "m": m, "k": k},
        branch="exact",
        symmetry=(-1) ** (k + 1),
        domain="off_diagonal",
        energy=exact_branch_energy(n, m, p.b),
    )


def exact_branch_spectrum(k: int, b: float, n_max: int, c: float = 1.0) -> List[SpectrumEntry]:
    """One entry per unordered pair {n, m} with n, m <= n_max, n, m < b, |n - m| > k."""
    if n_max >= b:
        raise IndexOutOfBoundState(f"n_max={n_max} must be below b={b}")
    p = ModelParams(-float(k), b, c)
    out = [
        SpectrumEntry("exact", (n, m), exact_branch_energy(n, m, b), p)
        for n in range(n_max + 1)
        for m in range(n + 1, n_max + 1)
        if m - n > k
    ]
    return _flag_degenerate(sorted(out, key=lambda e: (e.energy, e.indices)))


# ------------------------------------------------------ quasi-exact regime

def gauge_factor(p: ModelParams):
    """Evaluator ``(point, order) -> Jet`` for |cosh(x+/2) sinh(x-/2)|^a."""
    a = p.a

    def evaluator(point, k):
        X1 = J.seed_variable(point, 1, k)
        X2 = J.seed_variable(point, 2, k)
        if a == 0:
            return J.constant(np.ones(X1.batch_shape), k)
        g = J.cosh((X1 + X2) * 0.5) * J.sinh((X1 - X2) * 0.5)
        return J.abs_power(g, a)

    return evaluator


def _diagonal_sum(p: ModelParams, weights: Dict[int, float]):
    """Evaluator for |F|^a sum_k w_k eta_k(x1) eta_k(x2)."""
    gauge = gauge_factor(p)
    levels = sorted(weights)

    def evaluator(point, k):
        x1, x2 = point
        e1 = _eta_jets(levels, p.b, p.c, x1, k)
        e2 = _eta_jets(levels, p.b, p.c, x2, k)
        s = None
        for n in levels:
            term = J.outer(e1[n], e2[n]) * weights[n]
            s = term if s is None else s + term
        return gauge(point, k) * s

    return evaluator


def zero_mode(n: int, p: ModelParams) -> WaveFunction:
    eigenvalue(n, p.b)
    return WaveFunction(
        _diagonal_sum(p, {n: 1.0}),
        label=f"Omega[{n}]",
        params=p,
        indices={"n": n},
        branch="quasi",
        symmetry=1,
        domain="off_diagonal",
    )


def diagonal_energy(n: int, p: ModelParams) -> float:
    """c_nn = 2 eps_n - a^2 + 2a(b - n)."""
    return 2.0 * eigenvalue(n, p.b) - p.a ** 2 + 2.0 * p.a * (p.b - n)


def quasi_energy(n: int, m: int, M: int, p: ModelParams) -> float:
    """E_{n,m} at (a, b - M): -(b - M - n)^2 - (b - M - a - m - n)^2."""
    b = p.b - M
    return -((b - n) ** 2) - (b - p.a - m - n) ** 2


@dataclass(frozen=True)
class CollocationConfig:
    n_points: int = 400
    box: float = 4.0
    min_gap: float = 0.3
    seed: int = 0
    max_condition: float = 1e10

    def points(self) -> Tuple[np.ndarray, np.ndarray]:
        sampler = qmc.Halton(d=2, scramble=True, seed=self.seed)
        pts = np.empty((0, 2))
        while len(pts) < self.n_points:
            raw = qmc.scale(sampler.random(2 * self.n_points), -self.box, self.box)
            raw = raw[np.abs(raw[:, 0] - raw[:, 1]) > self.min_gap]
            pts = np.vstack([pts, raw])
        pts = pts[: self.n_points]
        return pts[:, 0], pts[:, 1]


@dataclass(frozen=True)
class CMatrix:
    """Matrix of H1 on the zero-mode span: H1 Omega_n = sum_k entries[n, k] Omega_k."""

    entries: np.ndarray
    fit_residual: float
    condition: float
    params: ModelParams

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def upper_max(self) -> float:
        """Largest |c_nk| with k > n, relative to max |c|."""
        iu = np.triu_indices(self.size, 1)
        if not len(iu[0]):
            return 0.0
        return float(np.max(np.abs(self.entries[iu])) / np.max(np.abs(self.entries)))

    def diagonal_error(self) -> float:
        """Largest relative deviation of the diagonal from the closed form."""
        exact = np.array([diagonal_energy(n, self.params) for n in range(self.size)])
        return float(np.max(np.abs(np.diag(self.entries) - exact) / np.maximum(np.abs(exact), 1.0)))


def default_n(p: ModelParams) -> int:
    return min(p.levels - 1, 6)


def c_matrix(p: ModelParams, N: Optional[int] = None, sampling: CollocationConfig = CollocationConfig()) -> CMatrix:
    """Fit the C matrix by least squares over collocation points.

    Both sides are divided by the common gauge factor, and each row is
    equilibrated before a QR-based least-squares solve.
    """
    N = default_n(p) if N is None else N
    eigenvalue(N, p.b)
    point = sampling.points()
    x1, x2 = point
    H1 = hamiltonian("H1", p)
    gauge = gauge_factor(p)(point, 0).value
    basis = np.stack([eigenfunction(k, p.b, p.c)(x1) * eigenfunction(k, p.b, p.c)(x2) for k in range(N + 1)], axis=1)
    rhs = np.stack([H1.apply(zero_mode(n, p), point, 0).value / gauge for n in range(N + 1)], axis=1)
    w = 1.0 / np.linalg.norm(basis, axis=1)
    A, Y = basis * w[:, None], rhs * w[:, None]
    cond = float(np.linalg.cond(A))
    if cond > sampling.max_condition:
        raise IllConditioned(f"collocation matrix condition number {cond:.3g} exceeds {sampling.max_condition:.3g}")
    coef, _, _, _ = linalg.lstsq(A, Y, lapack_driver="gelsy")
    residual = float(np.linalg.norm(A @ coef - Y) / np.linalg.norm(Y))
    # columns of coef hold rows of C
    return CMatrix(coef.T.copy(), residual, cond, p)


def principal_state(n: int, p: ModelParams, N: Optional[int] = None,
                    sampling: CollocationConfig = CollocationConfig(),
                    cmat: Optional[CMatrix] = None) -> WaveFunction:
    """Eigenfunction of H1 inside the zero-mode span, with energy c_nn."""
    N = default_n(p) if N is None else N
    if n > N:
        raise IndexOutOfBoundState(f"principal state n={n} needs N >= n (N={N})")
    eigenvalue(n, p.b)
    if n == 0:
        weights = {0: 1.0}
    else:
        C = (cmat or c_matrix(p, N, sampling)).entries
        E = C[n, n]
        scale = max(1.0, float(np.max(np.abs(np.diag(C)[: n + 1]))))
        v = np.zeros(n + 1)
        v[n] = 1.0
        for j in range(n - 1, -1, -1):
            gap = E - C[j, j]
            if abs(gap) < 1e-8 * scale:
                raise ResonanceError(
                    f"diagonal entries c_{n}{n} and c_{j}{j} coincide ({E:.12g}); "
                    "back-substitution is undefined"
                )
            v[j] = sum(v[k] * C[k, j] for k in range(j + 1, n + 1)) / gap
        weights = {k: float(v[k]) for k in range(n + 1)}
    return WaveFunction(
        _diagonal_sum(p, weights),
        label=f"Psi1[{n},0]",
        params=p,
        indices={"n": n, "m": 0, "M": 0},
        branch="quasi",
        symmetry=1,
        domain="off_diagonal",
        energy=diagonal_energy(n, p),
    )


def chain_state(n: int, m: int, M: int, p: ModelParams, N: Optional[int] = None,
                max_depth: int = MAX_CHAIN_DEPTH,
                sampling: CollocationConfig = CollocationConfig()) -> WaveFunction:
    """Qt+(a,b)...Qt+(a,b-M+1) Q+(a,b-M)...Q+(a+m-1,b-M) Psi_{n,0}(a+m, b-M)."""
    if m < 0 or M < 0:
        raise ValueError("chain lengths must be non-negative")
    if m + M > max_depth:
        raise ChainDepthExceeded(f"m + M = {m + M} exceeds the configured maximum {max_depth}")
    if p.b - M <= 0:
        raise IndexOutOfBoundState(f"b - M = {p.b - M} must stay positive")
    base = p.shifted(da=m, db=-M)
    eigenvalue(n, base.b)
    n_base = default_n(base) if N is None else min(N, default_n(base))
    state = principal_state(n, base, max(n_base, n), sampling)
    for j in range(m - 1, -1, -1):
        state = supercharge("Qplus", p.shifted(da=j, db=-M)).on(state)
    for i in range(M - 1, -1, -1):
        state = supercharge("Qtilde_plus", p.shifted(db=-i)).on(state)
    return WaveFunction(
        state.evaluator,
        label=f"Psi1[{n},{m},{M}]",
        params=p,
        indices={"n": n, "m": m, "M": M},
        branch="quasi",
        symmetry=(-1) ** m,
        domain="off_diagonal",
        energy=quasi_energy(n, m, M, p),
    )


def quasi_exact_spectrum(p: ModelParams, n_max: int, m_max: int, M_max: int = 0) -> List[SpectrumEntry]:
    if p.a <= -0.5:
        raise RegionError(f"quasi-exact regime needs a > -1/2, got a = {p.a}")
    if n_max >= p.b - M_max:
        raise IndexOutOfBoundState(f"n_max={n_max} must be below b - M_max = {p.b - M_max}")
    out = [
        SpectrumEntry("quasi", (n, m, M), quasi_energy(n, m, M, p), p)
        for n, m, M in itertools.product(range(n_max + 1), range(m_max + 1), range(M_max + 1))
    ]
    return _flag_degenerate(sorted(out, key=lambda e: (e.energy, e.indices)))


def _flag_degenerate(entries: List[SpectrumEntry]) -> List[SpectrumEntry]:
    energies = np.array([e.energy for e in entries])
    out = []
    for i, e in enumerate(entries):
        close = np.abs(energies - e.energy) <= DEGENERACY_TOL * max(1.0, abs(e.energy))
        out.append(dataclasses.replace(e, degenerate=bool(close.sum() > 1)))
    return out
