from __future__ import annotations

import numpy as np
import pytest

from hubbard_adapt.adapt import AdaptConfig, Ansatz, InitSpec, run_adapt
from hubbard_adapt.circuit import SectorEngine
from hubbard_adapt.errors import ValidationError
from hubbard_adapt.exact_diag import Sector, lowest_k
from hubbard_adapt.fermion import fermion_matrix
from hubbard_adapt.hubbard import GridSpec, HubbardModel, HubbardParams, build_pool
from hubbard_adapt.ssvqe import SubspaceSpec, default_weights, run_adapt_ssvqe, weighted_cost


def _engine(w, U, sector):
    model = HubbardModel(GridSpec(w, 1), HubbardParams(1.0, U, U / 2))
    return model, SectorEngine(model.hamiltonian(), sector, build_pool(w))


def test_default_weights_descend():
    assert default_weights(3).tolist() == [4.0, 2.0, 1.0]


@pytest.mark.parametrize("U", [3.0, 6.0])
def test_dimer_lowest_three(U):
    model, engine = _engine(2, U, Sector(1, 1))
    spec = SubspaceSpec.default(engine, 3, (4, 2, 1))
    res = run_adapt_ssvqe(model, spec, engine=engine)
    exact = lowest_k(model.hamiltonian(), Sector(1, 1), 3).energies
    assert np.abs(res.energies - exact).max() < 1e-6
    assert res.n_parameters <= 8
    amps = np.column_stack([s.amplitudes for s in res.states])
    assert np.abs(amps.conj().T @ amps - np.eye(3)).max() <= 1e-10
    assert not res.ordering_violation


def test_identity_ansatz_cost():
    model, engine = _engine(3, 3.0, Sector(1, 1))
    spec = SubspaceSpec.default(engine, 3)
    h = fermion_matrix(model.hamiltonian())
    cost, energies, overlap = weighted_cost(Ansatz(6, spec.init), h, spec)
    direct = [np.real(np.vdot(s.amplitudes, h @ s.amplitudes)) for s in spec.input_states(6)]
    assert cost == pytest.approx(float(np.dot(spec.weights, direct)))
    assert np.allclose(overlap, np.eye(3))


def test_optimum_cost_is_weighted_spectrum():
    model, engine = _engine(2, 3.0, Sector(1, 1))
    spec = SubspaceSpec.default(engine)
    res = run_adapt_ssvqe(model, spec, AdaptConfig(epsilon=0, delta=1e-8), engine=engine)
    exact = lowest_k(model.hamiltonian(), Sector(1, 1), spec.k).energies
    assert res.cost == pytest.approx(float(np.dot(spec.weights, exact)), abs=1e-9)
    h = fermion_matrix(model.hamiltonian())
    cost, _, overlap = weighted_cost(res.ansatz, h, spec)
    assert cost == pytest.approx(res.cost, abs=1e-12)
    assert np.abs(overlap - np.eye(spec.k)).max() < 1e-12


def test_single_state_matches_ground_run():
    model, engine = _engine(3, 3.0, Sector(1, 1))
    spec = SubspaceSpec(Sector(1, 1), 1, (1.0,), ((0, 5),))
    sub = run_adapt_ssvqe(model, spec, engine=engine)
    ground = run_adapt(model, Sector(1, 1), InitSpec.product([0, 5]), track_fidelity=False)
    assert [r.energy for r in sub.records] == [r.energy for r in ground.records]
    assert sub.ansatz.steps == ground.ansatz.steps


def test_cost_monotone_per_step():
    model, engine = _engine(3, 3.0, Sector(1, 1))
    res = run_adapt_ssvqe(model, SubspaceSpec.default(engine, 4), engine=engine)
    costs = [r.energy for r in res.records]
    assert all(b <= a + 1e-9 for a, b in zip(costs, costs[1:]))
    assert all(r.state_energies is not None and len(r.state_energies) == 4 for r in res.records)


def test_spec_validation():
    _, engine = _engine(2, 3.0, Sector(1, 1))
    with pytest.raises(ValidationError):
        SubspaceSpec(Sector(1, 1), 2, (1.0, 2.0), ((0, 3), (1, 2)))
    with pytest.raises(ValidationError):
        SubspaceSpec(Sector(1, 1), 2, (2.0, 1.0), ((0, 3), (0, 3)))
    with pytest.raises(ValidationError):
        SubspaceSpec(Sector(1, 1), 1, (1.0,), ((0, 2),))
    with pytest.raises(ValidationError):
        SubspaceSpec.default(engine, 5)
