from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as sla

from hubbard_adapt.adapt import pool_gradients
from hubbard_adapt.circuit import CompiledGenerator, SectorEngine, energy_and_gradient
from hubbard_adapt.exact_diag import Sector, ground_state
from hubbard_adapt.fermion import fermion_matrix
from hubbard_adapt.hubbard import GridSpec, HubbardModel, HubbardParams, build_pool
from hubbard_adapt.statevector import StateVector, basis_state
from oracles import ansatz_state, energy, generator_dense, hubbard_dense

H_STEP = 1e-5


def _fd_gradient(h, gens, thetas, init):
    out = np.zeros(len(thetas))
    for k in range(len(thetas)):
        up, dn = thetas.copy(), thetas.copy()
        up[k] += H_STEP
        dn[k] -= H_STEP
        out[k] = (energy(h, ansatz_state(gens, up, init)) - energy(h, ansatz_state(gens, dn, init))) / (2 * H_STEP)
    return out


def _setup(width=3, U=3.0, sector=(1, 1), start=(0, 5)):
    model = HubbardModel(GridSpec(width, 1), HubbardParams(1.0, U, U / 2))
    engine = SectorEngine(model.hamiltonian(), Sector(*sector), build_pool(width))
    active = [op for op, g in zip(engine.bank.pool, engine.bank.generators) if not g.is_zero]
    h_dense = hubbard_dense(width, 1, 1.0, U, U / 2)
    init_full = basis_state(start, 2 * width).amplitudes
    return engine, active, h_dense, init_full


def test_adjoint_matches_finite_differences():
    engine, active, h, init_full = _setup()
    rng = np.random.default_rng(11)
    init = engine.basis_vector([0, 5])
    for _ in range(10):
        ops = [active[i] for i in rng.integers(len(active), size=5)]
        thetas = rng.uniform(-np.pi, np.pi, size=5)
        e, g = energy_and_gradient(engine.generators(ops), thetas, engine.hamiltonian, init)
        dense = [generator_dense(op.descriptor[:2], op.indices, 6) for op in ops]
        assert e == pytest.approx(energy(h, ansatz_state(dense, thetas, init_full)), abs=1e-12)
        fd = _fd_gradient(h, dense, thetas, init_full)
        assert np.linalg.norm(g - fd) <= 1e-6 * np.linalg.norm(fd)


def test_depth_zero_energy():
    engine, _, _, _ = _setup()
    init = engine.basis_vector([0, 5])
    e, g = energy_and_gradient([], np.zeros(0), engine.hamiltonian, init)
    assert e == pytest.approx(engine.energy(init))
    assert g.size == 0


def test_closed_form_rotation_matches_expm():
    engine, active, _, _ = _setup()
    rng = np.random.default_rng(2)
    v = rng.normal(size=engine.dim)
    v /= np.linalg.norm(v)
    for op in active[:10]:
        gen = engine.generators([op])[0]
        a = gen.matrix().toarray()
        for th in (0.37, -1.9):
            assert np.allclose(gen.rotate(v, th), sla.expm(1j * th * a) @ v, atol=1e-13)


def test_pool_gradient_matches_finite_differences():
    model = HubbardModel(GridSpec(2, 1), HubbardParams(1.0, 3.0, 1.5))
    pool = build_pool(2)
    state = basis_state([0, 3], 4)
    h = hubbard_dense(2, 1, 1.0, 3.0, 1.5)
    grads = pool_gradients(state, fermion_matrix(model.hamiltonian()), pool)
    for op, g in zip(pool, grads):
        gen = [generator_dense(op.descriptor[:2], op.indices, 4)]
        fd = (energy(h, ansatz_state(gen, [H_STEP], state.amplitudes)) - energy(h, ansatz_state(gen, [-H_STEP], state.amplitudes))) / (2 * H_STEP)
        assert abs(g - fd) < 1e-7


def test_pool_gradient_is_commutator_expectation():
    model = HubbardModel(GridSpec(3, 1), HubbardParams(1.0, 2.0, 1.0))
    pool = build_pool(3)
    rng = np.random.default_rng(5)
    amps = np.zeros(64, dtype=complex)
    idx = [b for b in range(64) if bin(b).count("1") == 2]
    amps[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    state = StateVector.from_amplitudes(amps, normalize=True)
    h = fermion_matrix(model.hamiltonian()).toarray()
    grads = pool_gradients(state, h, pool)
    psi = state.amplitudes
    for op, g in zip(pool, grads):
        a = generator_dense(op.descriptor[:2], op.indices, 6)
        assert g == pytest.approx(-2 * np.imag(np.vdot(psi, h @ a @ psi)), abs=1e-12)


def test_eigenstate_has_vanishing_gradients():
    model = HubbardModel(GridSpec(3, 1), HubbardParams(1.0, 3.0, 1.5))
    _, ground, _ = ground_state(model.hamiltonian(), Sector(1, 1))
    grads = pool_gradients(ground, fermion_matrix(model.hamiltonian()), build_pool(3))
    assert np.abs(grads).max() < 1e-8


def test_commuting_generator_has_zero_gradient():
    # with only the on-site term, a pair hop that swaps doublons commutes with H
    model = HubbardModel(GridSpec(2, 1), HubbardParams(0.0, 3.0, 0.0))
    pool = [op for op in build_pool(2) if op.descriptor == "2b(0,1,2,3)"]
    h = fermion_matrix(model.hamiltonian()).toarray()
    a = generator_dense("2b", (0, 1, 2, 3), 4)
    assert np.abs(h @ a - a @ h).max() < 1e-14
    rng = np.random.default_rng(0)
    state = StateVector.from_amplitudes(rng.normal(size=16), normalize=True)
    assert abs(pool_gradients(state, h, pool)[0]) < 1e-14


def test_compiled_generator_is_signed_permutation():
    engine, active, _, _ = _setup()
    for op in active:
        gen: CompiledGenerator = engine.generators([op])[0]
        k = np.zeros((engine.dim, engine.dim))
        k[gen.dst, gen.src] = gen.val
        assert np.allclose(k, -k.T)
        assert set(np.abs(gen.val)) <= {1.0}
