from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hubbard_adapt.adapt import (
    AdaptConfig,
    AdaptProblem,
    Ansatz,
    InitSpec,
    adapt_step,
    pool_gradients,
    run_adapt,
    select_operator,
)
from hubbard_adapt.circuit import SectorEngine
from hubbard_adapt.errors import ConfigError, ValidationError
from hubbard_adapt.exact_diag import Sector
from hubbard_adapt.fermion import fermion_matrix
from hubbard_adapt.hubbard import GridSpec, HubbardModel, HubbardParams, build_pool
from hubbard_adapt.statevector import basis_state


def _model(w, U, h=1, mu=None):
    return HubbardModel(GridSpec(w, h), HubbardParams(1.0, U, U / 2 if mu is None else mu))


def test_dimer_reaches_ground_in_four_steps():
    res = run_adapt(_model(2, 3.0), Sector(1, 1))
    assert res.depth <= 4
    assert res.fidelity >= 1 - 1e-6


def test_three_site_strong_coupling():
    res = run_adapt(_model(3, 6.0), Sector(1, 1))
    assert 8 <= res.depth <= 12
    assert res.energy - res.exact_energy <= 1e-6
    assert res.fidelity >= 0.9999


@settings(max_examples=8, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.floats(0.5, 6.0))
def test_energy_monotone_and_variational(width, U):
    n = 1 if width < 4 else 2
    res = run_adapt(_model(width, U), Sector(n, n), config=AdaptConfig(max_depth=12))
    energies = [r.energy for r in res.records]
    assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))
    assert min(energies) >= res.exact_energy - 1e-10


def test_first_selection_is_steepest():
    model = _model(3, 3.0)
    pool = build_pool(3)
    res = run_adapt(model, Sector(1, 1), InitSpec.product([0, 5]), AdaptConfig(max_depth=1), pool=pool)
    grads = pool_gradients(basis_state([0, 5], 6), fermion_matrix(model.hamiltonian()), pool)
    top = np.abs(grads).max()
    chosen = pool[[op.descriptor for op in pool].index(res.records[1].selected_operator)]
    assert abs(grads[pool.index(chosen)]) == pytest.approx(top)
    assert res.records[1].pool_gradient == pytest.approx(grads[pool.index(chosen)])


def test_ties_go_to_lowest_index():
    assert select_operator(np.array([0.5, -2.0, 2.0, 1.0])) == 1
    assert select_operator(np.array([0.0, 1.0 - 1e-12, 1.0])) == 1


def test_ansatz_text_round_trip():
    res = run_adapt(_model(3, 3.0), Sector(1, 1))
    text = res.ansatz.dumps()
    again = Ansatz.loads(text)
    assert again == res.ansatz
    assert again.dumps() == text


def test_reloaded_ansatz_reproduces_energy_and_next_step():
    model = _model(3, 3.0)
    res = run_adapt(model, Sector(1, 1), config=AdaptConfig(max_depth=4))
    loaded = Ansatz.loads(res.ansatz.dumps())
    h = fermion_matrix(model.hamiltonian())
    state = loaded.prepare_state(model)
    assert np.real(np.vdot(state.amplitudes, h @ state.amplitudes)) == pytest.approx(res.energy, abs=1e-12)
    engine = SectorEngine(model.hamiltonian(), Sector(1, 1), build_pool(3))
    problem = AdaptProblem(engine, loaded.init, model)
    a, rec_a = adapt_step(problem, res.ansatz)
    b, rec_b = adapt_step(problem, loaded)
    assert rec_a.energy == rec_b.energy
    assert a == b


def test_bad_ansatz_text():
    with pytest.raises(ValidationError):
        Ansatz.loads("not an ansatz\n")


def test_exact_slater_start_stops_immediately():
    res = run_adapt(_model(2, 0.0, mu=0.0), Sector(1, 1), InitSpec.slater(1, 1))
    assert res.depth == 0
    assert res.fidelity == pytest.approx(1, abs=1e-12)


def test_degenerate_ground_rejected():
    with pytest.raises(ConfigError):
        run_adapt(_model(2, 0.0, h=2, mu=0.0), Sector(2, 2))


def test_start_outside_sector_rejected():
    with pytest.raises(ValidationError):
        run_adapt(_model(2, 1.0), Sector(1, 1), InitSpec.product([0, 2]))


def test_negative_threshold_rejected():
    with pytest.raises(ConfigError):
        AdaptConfig(epsilon=-1.0)


def test_target_fidelity_stop():
    res = run_adapt(_model(4, 3.0), Sector(2, 2), config=AdaptConfig(epsilon=0, delta=0, target_fidelity=0.99))
    assert res.stop_reason == "target_fidelity"
    assert res.fidelity >= 0.99
    assert res.records[-2].fidelity < 0.99
    assert res.depth_to_fidelity(0.99) == res.depth


def test_deterministic_trace():
    a = run_adapt(_model(4, 2.0), Sector(2, 2))
    b = run_adapt(_model(4, 2.0), Sector(2, 2))
    assert [r.to_dict() for r in a.records] == [r.to_dict() for r in b.records]
