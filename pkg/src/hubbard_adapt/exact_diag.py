"""Exact diagonalization inside fixed (n_up, n_down) sectors.

Sector matrices are built through the Jordan-Wigner Pauli route so that this
oracle shares no code with the ladder-action path used by the variational
engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fermion import FermionOperator, jordan_wigner, operator_matrix
from .statevector import DEGENERACY_TOL, StateVector, fix_phase

_EVEN_MASK = int("01" * 7, 2)
_ODD_MASK = int("10" * 7, 2)


@dataclass(frozen=True)
class Sector:
    n_up: int
    n_down: int

    def __post_init__(self):
        if self.n_up < 0 or self.n_down < 0:
            raise ValidationError(f"negative occupation in sector ({self.n_up},{self.n_down})")

    @property
    def n_electrons(self) -> int:
        return self.n_up + self.n_down

    def validate(self, n_modes: int) -> None:
        n_sites = n_modes // 2
        if self.n_up > n_sites or self.n_down > n_sites:
            raise ValidationError(
                f"sector ({self.n_up},{self.n_down}) exceeds {n_sites} sites per spin"
            )

    def shifted(self, spin: int, delta: int) -> Sector:
        if spin == 0:
            return Sector(self.n_up + delta, self.n_down)
        return Sector(self.n_up, self.n_down + delta)

    def __str__(self) -> str:
        return f"({self.n_up},{self.n_down})"


def sector_basis(n_modes: int, sector: Sector) -> np.ndarray:
    """Ascending basis indices with ``n_up`` even bits and ``n_down`` odd bits set."""
    sector.validate(n_modes)
    idx = np.arange(1 << n_modes, dtype=np.int64)
    n_up = np.bitwise_count(idx & _EVEN_MASK)
    n_dn = np.bitwise_count(idx & _ODD_MASK)
    return idx[(n_up == sector.n_up) & (n_dn == sector.n_down)]


def sector_hamiltonian(hamiltonian: FermionOperator, sector: Sector) -> tuple[np.ndarray, np.ndarray]:
    """Dense sector block of ``hamiltonian`` and the sector basis."""
    basis = sector_basis(hamiltonian.n_modes, sector)
    full = operator_matrix(jordan_wigner(hamiltonian), hamiltonian.n_modes)
    block = full[basis][:, basis].toarray()
    if np.abs(block.imag).max(initial=0.0) < 1e-14:
        block = block.real
    return block, basis


@dataclass(frozen=True, eq=False)
class EigenResult:
    energies: np.ndarray
    states: list[StateVector]
    ground_gap: float
    sector: Sector
    basis: np.ndarray
    vectors: np.ndarray  # sector coordinates, one column per state

    def __len__(self) -> int:
        return len(self.energies)


def _orthonormalize_cluster(vecs: np.ndarray) -> np.ndarray:
    """Deterministic basis of span(vecs): project unit vectors e_0, e_1, ... and Gram-Schmidt."""
    m = vecs.shape[1]
    proj = vecs @ vecs.conj().T
    out: list[np.ndarray] = []
    for b in range(vecs.shape[0]):
        v = proj[:, b].copy()
        for u in out:
            v -= u * np.vdot(u, v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-6:
            out.append(v / nrm)
            if len(out) == m:
                break
    return np.column_stack(out)


def _diagonalize(block: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, float]:
    energies, vecs = np.linalg.eigh(block)
    gap = float(energies[1] - energies[0]) if energies.size > 1 else float("inf")
    vecs = vecs.astype(complex)
    # regroup degenerate clusters so the returned basis does not depend on LAPACK
    start = 0
    while start < energies.size:
        stop = start + 1
        while stop < energies.size and energies[stop] - energies[stop - 1] < DEGENERACY_TOL:
            stop += 1
        if stop - start > 1 and start < k:
            vecs[:, start:stop] = _orthonormalize_cluster(vecs[:, start:stop])
        start = stop
    vecs = vecs[:, :k]
    for c in range(vecs.shape[1]):
        vecs[:, c] = fix_phase(vecs[:, c])
    return energies[:k], vecs, gap


def lowest_k(hamiltonian: FermionOperator, sector: Sector, k: int) -> EigenResult:
    block, basis = sector_hamiltonian(hamiltonian, sector)
    if not 1 <= k <= basis.size:
        raise ValidationError(f"K={k} outside [1, {basis.size}] for sector {sector}")
    energies, vecs, gap = _diagonalize(block, k)
    n = hamiltonian.n_modes
    states = [StateVector.embed(vecs[:, c], basis, n) for c in range(k)]
    return EigenResult(energies, states, gap, sector, basis, vecs)


def full_spectrum(hamiltonian: FermionOperator, sector: Sector) -> EigenResult:
    dim = sector_basis(hamiltonian.n_modes, sector).size
    return lowest_k(hamiltonian, sector, dim)


def ground_state(hamiltonian: FermionOperator, sector: Sector) -> tuple[float, StateVector, bool]:
    """Lowest eigenpair and whether it is degenerate (gap below 1e-8)."""
    res = lowest_k(hamiltonian, sector, 1)
    return float(res.energies[0]), res.states[0], bool(res.ground_gap < DEGENERACY_TOL)
