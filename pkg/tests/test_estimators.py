import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from scarf2d.estimators import ExactSolver, QuasiExactSolver
from scarf2d.exceptions import RegionError
from scarf2d.scarf1d import ModelParams
from scarf2d.solvers import chain_state, exact_branch_state


def grid():
    x = np.array([[0.5, -0.5], [1.0, 0.2], [-1.2, 0.3], [0.0, 1.5]])
    return x


def test_quasi_solver_fit_transform_matches_direct_states():
    est = QuasiExactSolver(a=1.0, b=4.5, c=1.0, n_max=1, m_max=1)
    out = est.fit().transform(grid())
    assert out.shape == (4, 4)
    assert list(est.energies_) == sorted(est.energies_)
    p = ModelParams(1.0, 4.5, 1.0)
    for col, idx in enumerate(est.indices_):
        np.testing.assert_allclose(out[:, col], chain_state(*idx, p)((grid()[:, 0], grid()[:, 1])), rtol=1e-12)
    assert est.c_matrix_.entries[0, 0] == pytest.approx(-32.5)


def test_exact_solver():
    est = ExactSolver(k=1, b=3.5, n_max=2).fit()
    assert est.indices_ == [(0, 2)]
    psi = exact_branch_state(1, 0, 2, ModelParams(-1, 3.5, 1.0))
    np.testing.assert_allclose(est.transform(grid())[:, 0], psi((grid()[:, 0], grid()[:, 1])))
    assert est.predict(grid()).shape == (4,)


def test_params_and_clone():
    est = QuasiExactSolver(a=0.5, n_max=2)
    params = est.get_params()
    assert params["a"] == 0.5 and params["n_max"] == 2
    other = clone(est).set_params(a=2.0)
    assert other.a == 2.0 and est.a == 0.5


def test_input_validation():
    est = QuasiExactSolver()
    with pytest.raises(NotFittedError):
        est.transform(grid())
    est.fit()
    with pytest.raises(ValueError):
        est.transform(np.array([[0.3, 0.3]]))
    with pytest.raises(ValueError):
        est.transform(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        est.transform(np.array([[np.nan, 0.1]]))
    with pytest.raises(RegionError):
        QuasiExactSolver(a=-0.7).fit()
    with pytest.raises(ValueError):
        ExactSolver(k=0).fit()


def test_pipeline_use():
    shift = FunctionTransformer(lambda X: X + np.array([0.1, -0.1]))
    pipe = make_pipeline(shift, QuasiExactSolver(n_max=0, m_max=0))
    out = pipe.fit(grid()).transform(grid())
    assert out.shape == (4, 1)
