"""Sector-restricted simulation of adaptive ansatz circuits.

Every pool generator ``A = i (P^ - P)`` built from a single excitation word
``P`` satisfies ``A^3 = A``: ``K = iA = P - P^`` is a signed partial
permutation and ``A^2`` projects onto its support. Hence

    exp(i theta A) = 1 + sin(theta) K + (cos(theta) - 1) A^2

which is applied here with index arithmetic on sector amplitudes. States may
be 1-D vectors or ``(dim, n_states)`` blocks; the latter is used for the
weighted multi-state cost.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError
from .exact_diag import Sector, sector_basis
from .fermion import FermionOperator, apply_ladder_word, fermion_matrix
from .hubbard import PoolOperator


@dataclass(frozen=True, eq=False)
class CompiledGenerator:
    """``K = P - P^`` restricted to a sector: ``(K v)[dst] = val * v[src]``."""

    src: np.ndarray
    dst: np.ndarray
    val: np.ndarray
    support: np.ndarray
    dim: int

    @classmethod
    def from_pool_operator(cls, op: PoolOperator, basis: np.ndarray) -> CompiledGenerator:
        new, signs = apply_ladder_word(op.excitation_word, basis)
        hit = np.flatnonzero(signs)
        pos = np.searchsorted(basis, new[hit])
        if np.any(pos >= basis.size) or np.any(basis[np.minimum(pos, basis.size - 1)] != new[hit]):
            raise ValidationError(f"{op.descriptor} leaves the sector")
        src = np.concatenate([hit, pos])
        dst = np.concatenate([pos, hit])
        val = np.concatenate([signs[hit], -signs[hit]])
        if np.unique(dst).size != dst.size:
            raise ValidationError(f"{op.descriptor} is not a single excitation on this sector")
        return cls(src.astype(np.int64), dst.astype(np.int64), val, np.sort(dst), basis.size)

    @property
    def is_zero(self) -> bool:
        return self.src.size == 0

    def apply_k(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        out[self.dst] = _bcast(self.val, v) * v[self.src]
        return out

    def rotate(self, v: np.ndarray, theta: float) -> np.ndarray:
        """``exp(i theta A) v``."""
        if theta == 0.0 or self.is_zero:
            return v.copy()
        c, s = np.cos(theta), np.sin(theta)
        out = v.copy()
        out[self.support] = c * v[self.support]
        out[self.dst] += s * _bcast(self.val, v) * v[self.src]
        return out

    def matrix(self) -> sp.csr_matrix:
        """Hermitian generator ``A = -i K`` as a sparse matrix."""
        k = sp.coo_matrix((self.val, (self.dst, self.src)), shape=(self.dim, self.dim))
        return (-1j * k).tocsr()


def _bcast(val: np.ndarray, v: np.ndarray) -> np.ndarray:
    return val[:, None] if v.ndim == 2 else val


def _real_if_possible(mat: sp.spmatrix) -> sp.csr_matrix:
    mat = sp.csr_matrix(mat)
    if mat.dtype.kind == "c" and (mat.nnz == 0 or np.abs(mat.data.imag).max() < 1e-15):
        mat = sp.csr_matrix(mat.real)
    return mat


class PoolBank:
    """All pool generators of one sector, stacked for vectorized screening."""

    def __init__(self, pool: Sequence[PoolOperator], basis: np.ndarray):
        self.pool = list(pool)
        self.generators = [CompiledGenerator.from_pool_operator(op, basis) for op in self.pool]
        self._index = {op: m for m, op in enumerate(self.pool)}
        owner = [np.full(g.src.size, m, dtype=np.int64) for m, g in enumerate(self.generators)]
        self._owner = np.concatenate(owner) if owner else np.zeros(0, dtype=np.int64)
        self._src = np.concatenate([g.src for g in self.generators]) if owner else self._owner
        self._dst = np.concatenate([g.dst for g in self.generators]) if owner else self._owner
        self._val = np.concatenate([g.val for g in self.generators]) if owner else np.zeros(0)

    def __len__(self) -> int:
        return len(self.pool)

    def index_of(self, op: PoolOperator) -> int:
        try:
            return self._index[op]
        except KeyError:
            raise ValidationError(f"{op.descriptor} is not in the pool") from None

    def gradients(self, psi: np.ndarray, lam: np.ndarray) -> np.ndarray:
        """``2 Re <lam| K_m |psi>`` for every generator, summed over state columns.

        With ``lam = H psi`` this equals ``i <psi|[H, A_m]|psi>``, the energy
        derivative for appending ``A_m`` at zero angle.
        """
        prod = np.conj(lam[self._dst]) * psi[self._src]
        if prod.ndim == 2:
            prod = prod.sum(axis=1)
        contrib = self._val * prod.real
        return 2.0 * np.bincount(self._owner, weights=contrib, minlength=len(self.pool))


def prepare(generators: Sequence[CompiledGenerator], thetas: Sequence[float], init: np.ndarray) -> np.ndarray:
    """Apply ``exp(i theta_k A_k)`` for ``k = 0, 1, ...`` (first appended acts first)."""
    v = np.array(init)
    for gen, th in zip(generators, thetas):
        v = gen.rotate(v, float(th))
    return v


def energy_and_gradient(
    generators: Sequence[CompiledGenerator],
    thetas: np.ndarray,
    hamiltonian: sp.spmatrix,
    init: np.ndarray,
    weights: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Weighted energy ``sum_j w_j <psi_j(theta)|H|psi_j(theta)>`` and its gradient.

    One forward sweep builds the final states; the adjoint sweep walks back
    through the circuit carrying ``H psi`` and un-applies each gate, so the
    cost is linear in depth.
    """
    thetas = np.asarray(thetas, dtype=float)
    if len(generators) != thetas.size:
        raise ValidationError(f"{len(generators)} generators but {thetas.size} angles")
    psi = prepare(generators, thetas, init)
    lam = hamiltonian @ psi
    if psi.ndim == 2:
        w = np.ones(psi.shape[1]) if weights is None else np.asarray(weights, dtype=float)
        lam = lam * w[None, :]
        energy = float(np.sum(np.real(np.conj(psi) * lam)))
    else:
        energy = float(np.real(np.vdot(psi, lam)))
    grad = np.zeros(thetas.size)
    phi = psi
    for k in range(thetas.size - 1, -1, -1):
        gen = generators[k]
        prod = np.conj(lam) * gen.apply_k(phi)
        grad[k] = 2.0 * float(np.sum(prod.real))
        phi = gen.rotate(phi, -thetas[k])
        lam = gen.rotate(lam, -thetas[k])
    return energy, grad


class SectorEngine:
    """Hamiltonian and pool of one model compiled onto one symmetry sector."""

    def __init__(self, hamiltonian: FermionOperator, sector: Sector, pool: Sequence[PoolOperator]):
        self.n_modes = hamiltonian.n_modes
        self.sector = sector
        self.basis = sector_basis(self.n_modes, sector)
        self.hamiltonian = _real_if_possible(fermion_matrix(hamiltonian, self.basis))
        self.bank = PoolBank(pool, self.basis)
        self._position = {int(b): i for i, b in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return self.basis.size

    def basis_vector(self, occupied_modes: Sequence[int]) -> np.ndarray:
        index = sum(1 << m for m in occupied_modes)
        if index not in self._position:
            raise ValidationError(f"occupation {sorted(occupied_modes)} is not in sector {self.sector}")
        v = np.zeros(self.dim, dtype=self.hamiltonian.dtype)
        v[self._position[index]] = 1.0
        return v

    def restrict(self, full_amplitudes: np.ndarray) -> np.ndarray:
        v = np.asarray(full_amplitudes)[self.basis]
        outside = np.linalg.norm(full_amplitudes) ** 2 - np.linalg.norm(v) ** 2
        if outside > 1e-12:
            raise ValidationError(f"state has weight {outside:.2e} outside sector {self.sector}")
        if self.hamiltonian.dtype.kind == "f" and np.abs(v.imag).max(initial=0.0) < 1e-15:
            v = v.real.copy()
        return v

    def generators(self, ops: Sequence[PoolOperator]) -> list[CompiledGenerator]:
        return [self.bank.generators[self.bank.index_of(op)] for op in ops]

    def energy(self, v: np.ndarray) -> float:
        return float(np.real(np.vdot(v, self.hamiltonian @ v)))
