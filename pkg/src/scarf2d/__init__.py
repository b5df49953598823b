"""Two-dimensional Scarf II model: jets, operator algebra, spectra and checks."""
from .exceptions import (
    ChainDepthExceeded,
    DegenerateAntisymmetric,
    DivisionByZero,
    DomainError,
    IllConditioned,
    IndexOutOfBoundState,
    OrderExceeded,
    PoleError,
    RecurrenceBreakdown,
    RegionError,
    ResonanceError,
    Scarf2DError,
    SelectionRuleViolated,
)
from .jets import Jet
from .scarf1d import ModelParams, eigenfunction, eigenvalue
from .operators import (
    DiffOp,
    WaveFunction,
    apply,
    compose,
    formal_adjoint,
    hamiltonian,
    supercharge,
    symmetry_operator,
)
from .solvers import (
    c_matrix,
    chain_state,
    exact_branch_spectrum,
    exact_branch_state,
    principal_state,
    quasi_exact_spectrum,
    separable_state,
    zero_mode,
)

__version__ = "0.1.0"
