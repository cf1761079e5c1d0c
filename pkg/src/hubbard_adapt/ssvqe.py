"""Adaptive subspace-search eigensolver for the lowest K states of a sector.

One ansatz unitary acts on K orthonormal occupation-basis inputs; the cost is
``sum_j w_j <in_j|U^ H U|in_j>`` with strictly descending weights, so the
minimum maps input ``j`` to the ``j``-th lowest eigenstate. Screening uses the
same weighted derivative at zero angle.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .adapt import AdaptConfig, AdaptProblem, Ansatz, InitSpec, StepRecord, adapt_loop
from .circuit import CompiledGenerator, SectorEngine, prepare
from .errors import ValidationError
from .exact_diag import Sector, sector_basis
from .hubbard import HubbardModel, PoolOperator, build_pool
from .statevector import DEGENERACY_TOL, StateVector, fix_phase

MAX_FULL_K = 16
FALLBACK_K = 8


def default_weights(k: int) -> np.ndarray:
    """``w_j = 2^(K-1-j)``."""
    return 2.0 ** np.arange(k - 1, -1, -1)


def default_k(sector_dim: int) -> int:
    return sector_dim if sector_dim <= MAX_FULL_K else FALLBACK_K


def lowest_basis_states(engine: SectorEngine, k: int) -> list[tuple[int, ...]]:
    """``k`` occupation states with the lowest diagonal energy; ties by basis index."""
    diag = engine.hamiltonian.diagonal().real
    order = np.argsort(np.round(diag, 12), kind="stable")[:k]
    out = []
    for pos in order:
        b = int(engine.basis[pos])
        out.append(tuple(m for m in range(engine.n_modes) if (b >> m) & 1))
    return out


@dataclass(frozen=True)
class SubspaceSpec:
    sector: Sector
    k: int
    weights: tuple[float, ...]
    inputs: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.weights) != self.k or len(self.inputs) != self.k:
            raise ValidationError(f"need exactly K={self.k} weights and inputs")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0) or np.any(np.diff(w) >= 0):
            raise ValidationError(f"weights must be positive and strictly descending, got {self.weights}")
        if len(set(self.inputs)) != self.k:
            raise ValidationError("subspace inputs must be distinct (orthonormal) basis states")
        for occ in self.inputs:
            n_up = sum(1 for m in occ if m % 2 == 0)
            if (n_up, len(occ) - n_up) != (self.sector.n_up, self.sector.n_down):
                raise ValidationError(f"input {occ} is not in sector {self.sector}")

    @classmethod
    def default(cls, engine: SectorEngine, k: int | None = None, weights: Sequence[float] | None = None) -> SubspaceSpec:
        k = default_k(engine.dim) if k is None else int(k)
        if not 1 <= k <= engine.dim:
            raise ValidationError(f"K={k} outside [1, {engine.dim}] for sector {engine.sector}")
        w = default_weights(k) if weights is None else np.asarray(weights, dtype=float)
        return cls(engine.sector, k, tuple(float(x) for x in w), tuple(lowest_basis_states(engine, k)))

    @property
    def init(self) -> InitSpec:
        return InitSpec.subspace(self.inputs)

    def input_states(self, n_modes: int) -> list[StateVector]:
        out = []
        for occ in self.inputs:
            amps = np.zeros(1 << n_modes, dtype=complex)
            amps[sum(1 << m for m in occ)] = 1.0
            out.append(StateVector(n_modes, amps))
        return out


def weighted_cost(ansatz: Ansatz, h_matrix, spec: SubspaceSpec) -> tuple[float, np.ndarray, np.ndarray]:
    """Weighted cost, per-input energies and the output overlap matrix.

    Works in the full ``2^n`` space; the overlap matrix ``<out_i|out_j>`` is
    returned so callers can confirm the outputs stay orthonormal.
    """
    n = ansatz.n_modes
    h = sp.csr_matrix(h_matrix)
    basis = np.arange(1 << n, dtype=np.int64)
    gens = [CompiledGenerator.from_pool_operator(op, basis) for op in ansatz.operators]
    block = np.column_stack([s.amplitudes for s in spec.input_states(n)])
    out = prepare(gens, ansatz.thetas, block)
    energies = np.real(np.sum(np.conj(out) * (h @ out), axis=0))
    cost = float(np.dot(spec.weights, energies))
    return cost, energies, out.conj().T @ out


@dataclass
class SSVQEResult:
    ansatz: Ansatz
    energies: np.ndarray  # ascending
    states: list[StateVector]
    input_order: list[int]  # input index behind each sorted output
    records: list[StepRecord]
    stop_reason: str
    cost: float
    ordering_violation: bool
    degenerate: list[bool]
    spec: SubspaceSpec

    @property
    def n_parameters(self) -> int:
        return self.ansatz.depth

    def __iter__(self):
        return iter((self.ansatz, list(zip(self.energies, self.states)), self.records))


def run_adapt_ssvqe(
    model: HubbardModel,
    spec: SubspaceSpec,
    config: AdaptConfig = AdaptConfig(),
    pool: Sequence[PoolOperator] | None = None,
    on_step: Callable[[StepRecord], None] | None = None,
    engine: SectorEngine | None = None,
) -> SSVQEResult:
    spec.sector.validate(model.n_modes)
    if engine is None:
        pool = build_pool(model.n_sites) if pool is None else pool
        engine = SectorEngine(model.hamiltonian(), spec.sector, pool)
    if spec.k > engine.dim:
        raise ValidationError(f"K={spec.k} exceeds sector dimension {engine.dim}")
    problem = AdaptProblem(engine, spec.init, model, spec.weights)
    ansatz, records, reason = adapt_loop(problem, config, None, on_step)
    outputs = problem.states(ansatz)
    if outputs.ndim == 1:
        outputs = outputs[:, None]
    energies = np.real(np.sum(np.conj(outputs) * (engine.hamiltonian @ outputs), axis=0))
    order = np.argsort(energies, kind="stable")
    # weights descend, so a correct optimum has energies ascending in input order
    violation = bool(np.any(np.diff(energies) < -DEGENERACY_TOL))
    sorted_e = energies[order]
    degenerate = [
        bool(
            (i > 0 and sorted_e[i] - sorted_e[i - 1] < DEGENERACY_TOL)
            or (i + 1 < sorted_e.size and sorted_e[i + 1] - sorted_e[i] < DEGENERACY_TOL)
        )
        for i in range(sorted_e.size)
    ]
    states = [
        StateVector.embed(fix_phase(outputs[:, j]), engine.basis, engine.n_modes) for j in order
    ]
    return SSVQEResult(
        ansatz=ansatz,
        energies=sorted_e,
        states=states,
        input_order=[int(j) for j in order],
        records=records,
        stop_reason=reason,
        cost=float(np.dot(spec.weights, energies)),
        ordering_violation=violation,
        degenerate=degenerate,
        spec=spec,
    )


def sector_dimension(model: HubbardModel, sector: Sector) -> int:
    return int(sector_basis(model.n_modes, sector).size)
