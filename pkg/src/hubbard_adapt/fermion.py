"""Second-quantized operators, Pauli operators and the Jordan-Wigner map.

Mode ``q`` maps to qubit ``q`` and qubit value 1 means the mode is occupied.
Basis index ``b`` has qubit 0 as its least-significant bit.
"""

from __future__ import annotations

import functools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from numbers import Number

import numpy as np
import scipy.sparse as sp

from .errors import ResourceError, ValidationError

MAX_QUBITS = 14
DROP_TOL = 1e-14
HERMITIAN_TOL = 1e-12

LadderOp = tuple[int, bool]  # (mode index, is_creation)


@dataclass(frozen=True)
class FermionTerm:
    coefficient: complex
    ladder_ops: tuple[LadderOp, ...]


def _merge(items: Iterable[tuple[tuple, complex]]) -> dict[tuple, complex]:
    out: dict[tuple, complex] = {}
    for key, coef in items:
        out[key] = out.get(key, 0.0) + complex(coef)
    return {k: v for k, v in out.items() if abs(v) >= DROP_TOL}


class FermionOperator:
    """Weighted sum of products of ladder operators on ``n_modes`` modes.

    Products are stored as written, left to right; the rightmost ladder
    operator acts first. Instances are immutable.
    """

    __slots__ = ("_terms", "_n_modes")

    def __init__(self, n_modes: int, terms: Mapping[tuple, complex] | Iterable = ()):
        if n_modes < 0:
            raise ValidationError(f"n_modes must be non-negative, got {n_modes}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        normalized = []
        for item in items:
            if isinstance(item, FermionTerm):
                ops, coef = item.ladder_ops, item.coefficient
            else:
                ops, coef = item
            ops = tuple((int(m), bool(c)) for m, c in ops)
            for mode, _ in ops:
                if not 0 <= mode < n_modes:
                    raise ValidationError(
                        f"mode index {mode} out of range for n_modes={n_modes}"
                    )
            normalized.append((ops, coef))
        self._n_modes = int(n_modes)
        self._terms = _merge(normalized)

    @classmethod
    def identity(cls, n_modes: int, coefficient: complex = 1.0) -> FermionOperator:
        return cls(n_modes, {(): coefficient})

    @property
    def n_modes(self) -> int:
        return self._n_modes

    @property
    def terms(self) -> list[FermionTerm]:
        return [FermionTerm(c, ops) for ops, c in self._terms.items()]

    def as_dict(self) -> dict[tuple, complex]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def _check_compatible(self, other: FermionOperator) -> None:
        if other.n_modes != self.n_modes:
            raise ValidationError(
                f"mode count mismatch: {self.n_modes} vs {other.n_modes}"
            )

    def __add__(self, other):
        if isinstance(other, Number):
            other = FermionOperator.identity(self.n_modes, other)
        if not isinstance(other, FermionOperator):
            return NotImplemented
        self._check_compatible(other)
        return FermionOperator(
            self.n_modes, list(self._terms.items()) + list(other._terms.items())
        )

    __radd__ = __add__

    def __neg__(self):
        return FermionOperator(self.n_modes, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return FermionOperator(
                self.n_modes, {k: v * other for k, v in self._terms.items()}
            )
        if not isinstance(other, FermionOperator):
            return NotImplemented
        self._check_compatible(other)
        items = [
            (a + b, ca * cb)
            for a, ca in self._terms.items()
            for b, cb in other._terms.items()
        ]
        return FermionOperator(self.n_modes, items)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / other)

    def adjoint(self) -> FermionOperator:
        items = [
            (tuple((m, not c) for m, c in reversed(ops)), np.conj(coef))
            for ops, coef in self._terms.items()
        ]
        return FermionOperator(self.n_modes, items)

    def normal_ordered(self) -> FermionOperator:
        """Creation operators left of annihilators, each group in descending mode order."""
        out: list[tuple[tuple, complex]] = []
        for ops, coef in self._terms.items():
            out.extend(_normal_order_term(list(ops), coef))
        return FermionOperator(self.n_modes, out)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        diff = (self - self.adjoint()).normal_ordered()
        return all(abs(c) < tol for _, c in diff)

    def is_equivalent(self, other: FermionOperator, tol: float = HERMITIAN_TOL) -> bool:
        diff = (self - other).normal_ordered()
        return all(abs(c) < tol for _, c in diff)

    def __repr__(self) -> str:
        parts = []
        for ops, coef in self._terms.items():
            word = " ".join(f"{m}^" if c else f"{m}" for m, c in ops) or "1"
            parts.append(f"({coef:.6g}) [{word}]")
        return f"FermionOperator(n_modes={self.n_modes}: " + " + ".join(parts) + ")"


def _ladder_key(op: LadderOp) -> tuple[int, int]:
    mode, is_creation = op
    return (0 if is_creation else 1, -mode)


def _normal_order_term(ops: list[LadderOp], coef: complex) -> list[tuple[tuple, complex]]:
    out = []
    stack = [(ops, coef)]
    while stack:
        ops, coef = stack.pop()
        swapped = False
        for i in range(len(ops) - 1):
            a, b = ops[i], ops[i + 1]
            if a == b:
                # c_p c_p = 0 and c_p^ c_p^ = 0
                swapped = True
                break
            if _ladder_key(a) > _ladder_key(b):
                swapped = True
                rest = ops[:i] + [b, a] + ops[i + 2 :]
                stack.append((rest, -coef))
                if a[0] == b[0]:
                    # c_p c_p^ = 1 - c_p^ c_p
                    stack.append((ops[:i] + ops[i + 2 :], coef))
                break
        if not swapped:
            out.append((tuple(ops), coef))
    return out


def creation(mode: int, n_modes: int) -> FermionOperator:
    return FermionOperator(n_modes, {((mode, True),): 1.0})


def annihilation(mode: int, n_modes: int) -> FermionOperator:
    return FermionOperator(n_modes, {((mode, False),): 1.0})


def number(mode: int, n_modes: int) -> FermionOperator:
    return FermionOperator(n_modes, {((mode, True), (mode, False)): 1.0})


# --------------------------------------------------------------------------
# Pauli operators
# --------------------------------------------------------------------------

_PAULI_PRODUCT = {
    ("X", "X"): (1, None), ("Y", "Y"): (1, None), ("Z", "Z"): (1, None),
    ("X", "Y"): (1j, "Z"), ("Y", "Z"): (1j, "X"), ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"), ("Z", "Y"): (-1j, "X"), ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis; identity on qubits not listed."""

    n_qubits: int
    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        seen = set()
        for q, p in self.factors:
            if not 0 <= q < self.n_qubits:
                raise ValidationError(f"qubit {q} out of range for n_qubits={self.n_qubits}")
            if p not in ("X", "Y", "Z"):
                raise ValidationError(f"unknown Pauli label {p!r}")
            if q in seen:
                raise ValidationError(f"qubit {q} listed twice")
            seen.add(q)
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse ``"X0 Z2"``-style labels; ``n_qubits`` taken from the highest index."""
        factors = [(int(tok[1:]), tok[0].upper()) for tok in label.split()]
        n = max((q for q, _ in factors), default=-1) + 1
        return cls(n, tuple(factors))

    def __mul__(self, other: PauliString) -> tuple[complex, PauliString]:
        phase = 1 + 0j
        merged = dict(self.factors)
        for q, p in other.factors:
            if q in merged:
                ph, res = _PAULI_PRODUCT[(merged[q], p)]
                phase *= ph
                if res is None:
                    del merged[q]
                else:
                    merged[q] = res
            else:
                merged[q] = p
        return phase, PauliString(max(self.n_qubits, other.n_qubits), tuple(merged.items()))

    def masks(self) -> tuple[int, int, int]:
        """Bit masks (flip, phase, n_y): X/Y flip a bit, Y/Z contribute a sign."""
        x = z = ny = 0
        for q, p in self.factors:
            if p in ("X", "Y"):
                x |= 1 << q
            if p in ("Y", "Z"):
                z |= 1 << q
            if p == "Y":
                ny += 1
        return x, z, ny

    def __str__(self) -> str:
        return " ".join(f"{p}{q}" for q, p in self.factors) or "I"


class QubitOperator:
    """Weighted sum of Pauli strings with merged duplicates."""

    __slots__ = ("_terms", "_n_qubits")

    def __init__(self, n_qubits: int, terms: Iterable[tuple[complex, PauliString]] = ()):
        self._n_qubits = int(n_qubits)
        merged: dict[tuple, complex] = {}
        for coef, ps in terms:
            if any(q >= n_qubits for q, _ in ps.factors):
                raise ValidationError(f"Pauli string {ps} exceeds n_qubits={n_qubits}")
            merged[ps.factors] = merged.get(ps.factors, 0.0) + complex(coef)
        self._terms = {k: v for k, v in merged.items() if abs(v) >= DROP_TOL}

    @property
    def n_qubits(self) -> int:
        return self._n_qubits

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        return [(c, PauliString(self._n_qubits, f)) for f, c in self._terms.items()]

    def as_dict(self) -> dict[str, complex]:
        return {str(PauliString(self._n_qubits, f)): c for f, c in self._terms.items()}

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: QubitOperator) -> QubitOperator:
        return QubitOperator(max(self.n_qubits, other.n_qubits), self.terms + other.terms)

    def __sub__(self, other: QubitOperator) -> QubitOperator:
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, Number):
            return QubitOperator(self.n_qubits, [(c * other, p) for c, p in self.terms])
        if not isinstance(other, QubitOperator):
            return NotImplemented
        out = []
        for ca, pa in self.terms:
            for cb, pb in other.terms:
                phase, prod = pa * pb
                out.append((ca * cb * phase, prod))
        return QubitOperator(max(self.n_qubits, other.n_qubits), out)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def adjoint(self) -> QubitOperator:
        return QubitOperator(self.n_qubits, [(np.conj(c), p) for c, p in self.terms])

    def is_close(self, other: QubitOperator, tol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) < tol for c, _ in diff.terms)

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g}) {p}" for c, p in self.terms)
        return f"QubitOperator(n_qubits={self.n_qubits}: {body or '0'})"


@functools.lru_cache(maxsize=None)
def _jw_ladder(mode: int, is_creation: bool, n: int) -> QubitOperator:
    zs = tuple((q, "Z") for q in range(mode))
    sign = -1j if is_creation else 1j
    return QubitOperator(
        n,
        [
            (0.5, PauliString(n, zs + ((mode, "X"),))),
            (0.5 * sign, PauliString(n, zs + ((mode, "Y"),))),
        ],
    )


def jordan_wigner(op: FermionOperator) -> QubitOperator:
    """Map ``a_k -> Z_0 ... Z_{k-1} (X_k + iY_k)/2`` term by term."""
    n = op.n_modes
    total = []
    for ops, coef in op:
        acc = QubitOperator(n, [(coef, PauliString(n))])
        for mode, is_creation in ops:
            if not 0 <= mode < n:
                raise ValidationError(f"mode index {mode} out of range for n_modes={n}")
            acc = acc * _jw_ladder(mode, is_creation, n)
        total.extend(acc.terms)
    return QubitOperator(n, total)


def _check_size(n_qubits: int) -> None:
    if n_qubits > MAX_QUBITS:
        raise ResourceError(
            f"dense simulation limited to {MAX_QUBITS} qubits, requested {n_qubits}"
        )


def operator_matrix(op: QubitOperator, n_qubits: int | None = None) -> sp.csr_matrix:
    """Sparse ``2^n x 2^n`` matrix of a Pauli sum in the computational basis."""
    n = op.n_qubits if n_qubits is None else int(n_qubits)
    if n < op.n_qubits and any(q >= n for _, p in op.terms for q, _ in p.factors):
        raise ValidationError(f"operator acts beyond n_qubits={n}")
    _check_size(n)
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    rows_all, cols_all, vals_all = [], [], []
    for coef, ps in op.terms:
        x, z, ny = ps.masks()
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
        rows_all.append(cols ^ x)
        cols_all.append(cols)
        vals_all.append(coef * (1j**ny) * signs)
    if not vals_all:
        return sp.csr_matrix((dim, dim), dtype=complex)
    mat = sp.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(dim, dim),
    ).tocsr()
    mat.sum_duplicates()
    mat.data[np.abs(mat.data) < DROP_TOL] = 0
    mat.eliminate_zeros()
    return mat


def is_hermitian_matrix(mat, tol: float = HERMITIAN_TOL) -> bool:
    diff = mat - mat.conj().T
    if sp.issparse(diff):
        return diff.nnz == 0 or float(abs(diff).max()) < tol
    return float(np.max(np.abs(diff), initial=0.0)) < tol


def apply_ladder_word(
    ops: tuple[LadderOp, ...], states: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Act with a ladder-operator product on occupation-basis states.

    Returns ``(new_states, signs)``; ``signs`` is 0 where the product annihilates
    the state.
    """
    states = np.asarray(states, dtype=np.int64).copy()
    signs = np.ones(states.shape, dtype=np.float64)
    for mode, is_creation in reversed(ops):
        bit = np.int64(1) << mode
        occupied = (states & bit) != 0
        allowed = ~occupied if is_creation else occupied
        parity = np.bitwise_count(states & (bit - 1)) & 1
        signs = np.where(allowed, signs * (1.0 - 2.0 * parity), 0.0)
        states = states ^ bit
    return states, signs


def fermion_matrix(
    op: FermionOperator,
    basis: np.ndarray | None = None,
    row_basis: np.ndarray | None = None,
) -> sp.csr_matrix:
    """Matrix of ``P_rows op P_cols`` built from direct ladder action.

    ``basis`` lists the column basis indices (ascending); ``row_basis`` defaults
    to ``basis``. Amplitude leaving the row basis is discarded. This path does
    not go through Pauli strings, so it doubles as a cross-check of
    :func:`jordan_wigner`.
    """
    if basis is None:
        _check_size(op.n_modes)
        basis = np.arange(1 << op.n_modes, dtype=np.int64)
    basis = np.asarray(basis, dtype=np.int64)
    rows_basis = basis if row_basis is None else np.asarray(row_basis, dtype=np.int64)
    rows_all, cols_all, vals_all = [], [], []
    col_idx = np.arange(basis.size)
    for ops, coef in op:
        new, signs = apply_ladder_word(ops, basis)
        pos = np.searchsorted(rows_basis, new)
        pos_c = np.minimum(pos, max(rows_basis.size - 1, 0))
        keep = (signs != 0) & (rows_basis.size > 0)
        if rows_basis.size:
            keep &= rows_basis[pos_c] == new
        rows_all.append(pos_c[keep])
        cols_all.append(col_idx[keep])
        vals_all.append(coef * signs[keep])
    shape = (rows_basis.size, basis.size)
    if not vals_all:
        return sp.csr_matrix(shape, dtype=complex)
    mat = sp.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=shape,
    ).tocsr()
    mat.sum_duplicates()
    mat.data[np.abs(mat.data) < DROP_TOL] = 0
    mat.eliminate_zeros()
    return mat
