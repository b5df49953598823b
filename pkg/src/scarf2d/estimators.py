"""scikit-learn style front end for the two solvable branches.

``fit`` builds the spectrum and the analytic states for the configured
couplings; ``transform`` evaluates every fitted state at a batch of points
``(x1, x2)``. There is no training data. ``fit`` accepts and ignores ``X``
so that the objects drop into pipelines and ``clone``/``get_params`` work.
"""
from __future__ import annotations

from typing import List, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import PoleError
from .operators import WaveFunction
from .scarf1d import ModelParams
from .solvers import (
    SpectrumEntry,
    c_matrix,
    chain_state,
    default_n,
    exact_branch_spectrum,
    exact_branch_state,
    quasi_exact_spectrum,
)

__all__ = ["QuasiExactSolver", "ExactSolver"]


def _check_points(X, min_gap: float) -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected points with 2 columns (x1, x2), got {X.shape[1]}")
    if np.any(np.abs(X[:, 0] - X[:, 1]) < min_gap):
        raise ValueError(f"points must satisfy |x1 - x2| >= {min_gap}; states are singular on the diagonal")
    return X


class _SolverBase(TransformerMixin, BaseEstimator):
    min_gap = 1e-8

    def _build(self) -> List[SpectrumEntry]:
        raise NotImplementedError

    def _state(self, entry: SpectrumEntry) -> WaveFunction:
        raise NotImplementedError

    def fit(self, X=None, y=None):
        self.spectrum_ = self._build()
        self.states_ = [self._state(e) for e in self.spectrum_]
        self.energies_ = np.array([e.energy for e in self.spectrum_])
        self.indices_ = [tuple(e.indices) for e in self.spectrum_]
        self.n_features_in_ = 2
        return self

    def transform(self, X) -> np.ndarray:
        """Values of every fitted state at the rows of X, shape (n_points, n_states)."""
        check_is_fitted(self, "states_")
        X = _check_points(X, self.min_gap)
        point = (X[:, 0], X[:, 1])
        try:
            cols = [psi(point) for psi in self.states_]
        except PoleError as exc:
            raise ValueError(str(exc)) from exc
        if not cols:
            return np.empty((X.shape[0], 0))
        return np.column_stack(cols)

    def predict(self, X) -> np.ndarray:
        """Index of the fitted state with the largest magnitude at each point."""
        return np.argmax(np.abs(self.transform(X)), axis=1)


class QuasiExactSolver(_SolverBase):
    """States Psi_{n,m,M} of the quasi-exactly solvable branch (a > -1/2)."""

    def __init__(self, a: float = 1.0, b: float = 4.5, c: float = 1.0, n_max: int = 1,
                 m_max: int = 1, M_max: int = 0, N: Optional[int] = None):
        self.a = a
        self.b = b
        self.c = c
        self.n_max = n_max
        self.m_max = m_max
        self.M_max = M_max
        self.N = N

    def _build(self):
        self.params_ = ModelParams(self.a, self.b, self.c)
        self.c_matrix_ = c_matrix(self.params_, self.N if self.N is not None else default_n(self.params_))
        return quasi_exact_spectrum(self.params_, self.n_max, self.m_max, self.M_max)

    def _state(self, entry):
        n, m, M = entry.indices
        return chain_state(n, m, M, self.params_, self.N)


class ExactSolver(_SolverBase):
    """Symmetric-partner states of the exactly solvable branch a = -k."""

    def __init__(self, k: int = 1, b: float = 3.5, c: float = 1.0, n_max: int = 2):
        self.k = k
        self.b = b
        self.c = c
        self.n_max = n_max

    def _build(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        self.params_ = ModelParams(-float(self.k), self.b, self.c)
        return exact_branch_spectrum(int(self.k), self.b, self.n_max, self.c)

    def _state(self, entry):
        n, m = entry.indices
        return exact_branch_state(int(self.k), n, m, self.params_)
