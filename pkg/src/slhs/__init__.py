"""Transition-amplitude inequalities, self-testing and a nonlocality measure for bipartite states."""

from ._kernels import BACKEND
from .basis_opt import BasisPoint, OptimizerConfig, optimize
from .families import IsotropicSpec, WernerSpec, bell, isotropic, thresholds, werner
from .inequalities import InequalityKind, InequalityReport, evaluate, max_violation
from .qcore import BipartiteState, DensityMatrix, Ket, LocalBasis, read_state, write_state

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BasisPoint",
    "BipartiteState",
    "DensityMatrix",
    "InequalityKind",
    "InequalityReport",
    "IsotropicSpec",
    "Ket",
    "LocalBasis",
    "OptimizerConfig",
    "WernerSpec",
    "bell",
    "evaluate",
    "isotropic",
    "max_violation",
    "optimize",
    "read_state",
    "thresholds",
    "werner",
    "write_state",
]
