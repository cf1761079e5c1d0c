from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hubbard_adapt.errors import ResourceError, ValidationError
from hubbard_adapt.fermion import (
    FermionOperator,
    PauliString,
    QubitOperator,
    annihilation,
    creation,
    fermion_matrix,
    jordan_wigner,
    number,
    operator_matrix,
)
from oracles import ladder


def test_number_operator_image():
    got = jordan_wigner(number(1, 2)).as_dict()
    assert got == pytest.approx({"I": 0.5, "Z1": -0.5})


def test_annihilator_carries_parity_string():
    got = jordan_wigner(annihilation(2, 3)).as_dict()
    assert set(got) == {"Z0 Z1 X2", "Z0 Z1 Y2"}
    assert got["Z0 Z1 X2"] == pytest.approx(0.5)
    assert got["Z0 Z1 Y2"] == pytest.approx(0.5j)


def test_hopping_image_is_xx_plus_yy():
    hop = creation(0, 2) * annihilation(1, 2) + creation(1, 2) * annihilation(0, 2)
    assert jordan_wigner(hop).as_dict() == pytest.approx({"X0 X1": 0.5, "Y0 Y1": 0.5})


def test_single_pauli_matrices():
    z = operator_matrix(QubitOperator(1, [(1.0, PauliString.from_label("Z0"))]), 1).toarray()
    x = operator_matrix(QubitOperator(1, [(1.0, PauliString.from_label("X0"))]), 1).toarray()
    assert np.array_equal(z, np.diag([1, -1]))
    assert np.array_equal(x, [[0, 1], [1, 0]])


def test_hopping_matrix_couples_01_and_10_only():
    hop = creation(0, 2) * annihilation(1, 2) + creation(1, 2) * annihilation(0, 2)
    m = operator_matrix(jordan_wigner(hop), 2).toarray()
    expected = np.zeros((4, 4))
    expected[1, 2] = expected[2, 1] = 1
    assert np.allclose(m, expected, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_canonical_anticommutation(n):
    for p in range(n):
        for q in range(n):
            anti = annihilation(p, n) * creation(q, n) + creation(q, n) * annihilation(p, n)
            m = operator_matrix(jordan_wigner(anti), n).toarray()
            target = np.eye(1 << n) if p == q else np.zeros((1 << n, 1 << n))
            assert np.abs(m - target).max() < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ladder_matrices_match_kronecker_oracle(n):
    for m in range(n):
        got = operator_matrix(jordan_wigner(annihilation(m, n)), n).toarray()
        assert np.allclose(got, ladder(m, n))


def test_matrix_size_guard():
    with pytest.raises(ResourceError):
        operator_matrix(QubitOperator(15, [(1.0, PauliString.from_label("Z0"))]), 15)


def test_mode_out_of_range_rejected():
    with pytest.raises(ValidationError):
        FermionOperator(2, [(((2, True),), 1.0)])


_word = st.lists(st.tuples(st.integers(0, 2), st.booleans()), min_size=1, max_size=3)
_coef = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
_op = st.lists(st.tuples(_word, _coef), min_size=1, max_size=3).map(
    lambda items: FermionOperator(3, [(tuple(w), c) for w, c in items])
)


def _mat(op: FermionOperator) -> np.ndarray:
    return operator_matrix(jordan_wigner(op), op.n_modes).toarray()


@settings(max_examples=60, deadline=None)
@given(_op, _op, _coef)
def test_jw_is_linear(a, b, c):
    assert np.allclose(_mat(a + c * b), _mat(a) + c * _mat(b), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(_op)
def test_jw_commutes_with_adjoint(a):
    assert np.allclose(_mat(a.adjoint()), _mat(a).conj().T, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(_op, _op)
def test_jw_is_multiplicative(a, b):
    assert np.allclose(_mat(a * b), _mat(a) @ _mat(b), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(_op)
def test_ladder_action_agrees_with_jw(a):
    assert np.allclose(fermion_matrix(a).toarray(), _mat(a), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(_op)
def test_normal_ordering_preserves_matrix(a):
    assert np.allclose(_mat(a.normal_ordered()), _mat(a), atol=1e-12)


def test_number_conserving_operator_is_block_diagonal():
    op = creation(0, 4) * annihilation(2, 4) + creation(1, 4) * creation(3, 4) * annihilation(3, 4) * annihilation(1, 4)
    m = operator_matrix(jordan_wigner(op), 4).toarray()
    counts = np.array([bin(b).count("1") for b in range(16)])
    rows, cols = np.nonzero(np.abs(m) > 1e-12)
    assert np.all(counts[rows] == counts[cols])


def test_hermiticity_check():
    hop = creation(0, 2) * annihilation(1, 2)
    assert not hop.is_hermitian()
    assert (hop + hop.adjoint()).is_hermitian()
