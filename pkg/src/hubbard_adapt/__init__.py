"""Adaptive variational ground and excited states of the Fermi-Hubbard model."""

from __future__ import annotations

__version__ = "0.1.0"

from .adapt import AdaptConfig, AdaptResult, Ansatz, InitSpec, StepRecord, adapt_step, pool_gradients, run_adapt
from .errors import (
    ConfigError,
    DegeneracyError,
    HubbardAdaptError,
    NumericalError,
    ResourceError,
    UnsupportedGeometryError,
    ValidationError,
)
from .exact_diag import Sector, full_spectrum, ground_state, lowest_k, sector_basis
from .fermion import FermionOperator, PauliString, QubitOperator, jordan_wigner, operator_matrix
from .hubbard import GridSpec, HubbardModel, HubbardParams, PoolOperator, build_hamiltonian, build_pool, momentum_mode
from .optimizer import OptimizeConfig, OptimizeResult, minimize
from .ssvqe import SubspaceSpec, run_adapt_ssvqe
from .statevector import StateVector, apply_exp, basis_state, expectation, fidelity, slater_state

__all__ = [
    "AdaptConfig",
    "AdaptResult",
    "Ansatz",
    "ConfigError",
    "DegeneracyError",
    "FermionOperator",
    "GridSpec",
    "HubbardAdaptError",
    "HubbardModel",
    "HubbardParams",
    "InitSpec",
    "NumericalError",
    "OptimizeConfig",
    "OptimizeResult",
    "PauliString",
    "PoolOperator",
    "QubitOperator",
    "ResourceError",
    "Sector",
    "StateVector",
    "StepRecord",
    "SubspaceSpec",
    "UnsupportedGeometryError",
    "ValidationError",
    "adapt_step",
    "apply_exp",
    "basis_state",
    "build_hamiltonian",
    "build_pool",
    "expectation",
    "fidelity",
    "full_spectrum",
    "ground_state",
    "jordan_wigner",
    "lowest_k",
    "minimize",
    "momentum_mode",
    "operator_matrix",
    "pool_gradients",
    "run_adapt",
    "run_adapt_ssvqe",
    "sector_basis",
    "slater_state",
]
