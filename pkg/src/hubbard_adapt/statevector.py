"""Dense statevectors over the occupation basis (qubit 0 = least-significant bit)."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import DegeneracyError, ValidationError
from .fermion import MAX_QUBITS, FermionOperator, fermion_matrix, is_hermitian_matrix

NORM_TOL = 1e-10
DEGENERACY_TOL = 1e-8


def fix_phase(amplitudes: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real positive.

    Near-ties in magnitude resolve to the lowest basis index.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    mags = np.abs(amps)
    if mags.size == 0 or mags.max() == 0:
        return amps
    pivot = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-8))[0])
    return amps * (np.conj(amps[pivot]) / mags[pivot])


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValidationError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_TOL:
            raise ValidationError(f"state is not normalized (norm {norm:.3e})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, n_qubits: int | None = None, normalize: bool = False) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        if n_qubits is None:
            n_qubits = int(amps.size).bit_length() - 1
        return cls(n_qubits, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def with_fixed_phase(self) -> StateVector:
        return StateVector(self.n_qubits, fix_phase(self.amplitudes))

    def restrict(self, basis: np.ndarray) -> np.ndarray:
        return self.amplitudes[np.asarray(basis)]

    @classmethod
    def embed(cls, sector_amplitudes: np.ndarray, basis: np.ndarray, n_qubits: int) -> StateVector:
        full = np.zeros(1 << n_qubits, dtype=complex)
        full[np.asarray(basis)] = sector_amplitudes
        return cls(n_qubits, full)


def basis_state(occupied_modes: Iterable[int], n_qubits: int) -> StateVector:
    modes = list(occupied_modes)
    if len(set(modes)) != len(modes):
        raise ValidationError(f"duplicate occupied mode in {modes}")
    if any(not 0 <= m < n_qubits for m in modes):
        raise ValidationError(f"occupied modes {modes} out of range for {n_qubits} qubits")
    if n_qubits > MAX_QUBITS:
        raise ValidationError(f"at most {MAX_QUBITS} qubits supported")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[sum(1 << m for m in modes)] = 1.0
    return StateVector(n_qubits, amps)


def slater_state(hopping: np.ndarray, n_up: int, n_down: int) -> StateVector:
    """Ground state of the quadratic Hamiltonian ``sum_ij h_ij c_i^ c_j`` per spin.

    Each spin species fills its lowest one-body orbitals.
    """
    h = np.asarray(hopping, dtype=float)
    n_sites = h.shape[0]
    if h.shape != (n_sites, n_sites) or not np.allclose(h, h.T, atol=1e-12):
        raise ValidationError("hopping matrix must be real symmetric")
    if not (0 <= n_up <= n_sites and 0 <= n_down <= n_sites):
        raise ValidationError(f"({n_up},{n_down}) electrons do not fit {n_sites} sites")
    levels, orbitals = np.linalg.eigh(h)
    for n_fill in (n_up, n_down):
        if 0 < n_fill < n_sites and levels[n_fill] - levels[n_fill - 1] < DEGENERACY_TOL:
            raise DegeneracyError(
                f"one-body level degenerate at the Fermi level for filling {n_fill}"
            )
    n_modes = 2 * n_sites
    vec = np.zeros(1 << n_modes, dtype=complex)
    vec[0] = 1.0
    for spin, n_fill in ((0, n_up), (1, n_down)):
        for a in range(n_fill):
            terms = [(((2 * i + spin, True),), orbitals[i, a]) for i in range(n_sites)]
            vec = fermion_matrix(FermionOperator(n_modes, terms)) @ vec
    return StateVector(n_modes, fix_phase(vec / np.linalg.norm(vec)))


def apply_exp(generator, theta: float, state: StateVector) -> StateVector:
    """Return ``exp(i theta A) |state>`` for a Hermitian sparse or dense ``A``."""
    mat = sp.csr_matrix(generator)
    if mat.shape != (state.dim, state.dim):
        raise ValidationError(f"generator shape {mat.shape} does not match state dim {state.dim}")
    if not is_hermitian_matrix(mat):
        raise ValidationError("generator is not Hermitian")
    if theta == 0:
        return state
    out = expm_multiply((1j * theta) * mat.astype(complex), state.amplitudes)
    return StateVector(state.n_qubits, out)


def expectation(op_matrix, state: StateVector) -> float | complex:
    """``<state|O|state>``; returned as float when the imaginary part is negligible."""
    v = state.amplitudes
    val = complex(np.vdot(v, op_matrix @ v))
    if abs(val.imag) <= 1e-12 * max(1.0, abs(val.real)):
        return val.real
    return val


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
