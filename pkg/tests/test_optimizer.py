from __future__ import annotations

import numpy as np
import pytest

from hubbard_adapt.adapt import Ansatz, InitSpec
from hubbard_adapt.circuit import SectorEngine, energy_and_gradient
from hubbard_adapt.errors import NumericalError
from hubbard_adapt.exact_diag import Sector, ground_state
from hubbard_adapt.hubbard import GridSpec, HubbardModel, HubbardParams, PoolOperator, build_pool
from hubbard_adapt.optimizer import OptimizeConfig, line_search, minimize


def test_quadratic():
    res = minimize(lambda x: ((x[0] - 3) ** 2, np.array([2 * (x[0] - 3)])), np.array([0.0]))
    assert res.converged
    assert res.x_star[0] == pytest.approx(3, abs=1e-8)
    assert res.f_star == pytest.approx(0, abs=1e-8)


def rosenbrock(x):
    a, b = x
    f = (1 - a) ** 2 + 100 * (b - a * a) ** 2
    g = np.array([-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)])
    return f, g


def test_rosenbrock():
    res = minimize(rosenbrock, np.array([-1.2, 1.0]), OptimizeConfig(grad_tol=1e-9, f_tol=1e-16))
    assert np.allclose(res.x_star, [1, 1], atol=1e-5)


def test_deterministic():
    a = minimize(rosenbrock, np.array([-1.2, 1.0]))
    b = minimize(rosenbrock, np.array([-1.2, 1.0]))
    assert a.x_star.tobytes() == b.x_star.tobytes()
    assert a.iterations == b.iterations


def test_non_finite_objective_raises():
    with pytest.raises(NumericalError):
        minimize(lambda x: (float("nan"), np.zeros(1)), np.zeros(1))


def test_line_search_never_increases():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.normal(size=2)
        f0, g0 = rosenbrock(x)
        found = line_search(rosenbrock, x, f0, g0, -g0)
        assert found is not None
        assert found[1] <= f0


def _one_hop_objective(n_up, n_down, occupied):
    model = HubbardModel(GridSpec(2, 1), HubbardParams(1.0, 0.0, 0.0))
    sector = Sector(n_up, n_down)
    engine = SectorEngine(model.hamiltonian(), sector, build_pool(2))
    gens = engine.generators([PoolOperator("one_body", (0, 2), 4)])
    init = engine.basis_vector(occupied)

    def fun(x):
        return energy_and_gradient(gens, x, engine.hamiltonian, init)

    return fun, ground_state(model.hamiltonian(), sector)[0]


def test_one_parameter_vqe_against_scan():
    # both electrons start on site 0; only the up electron can hop
    fun, _ = _one_hop_objective(1, 1, [0, 1])
    scan = min(fun(np.array([t]))[0] for t in np.linspace(-np.pi, np.pi, 20001))
    res = minimize(fun, np.array([0.1]), OptimizeConfig(grad_tol=1e-10))
    assert scan - 1e-7 <= res.f_star <= scan + 1e-12


def test_one_parameter_vqe_reaches_sector_ground():
    fun, e_exact = _one_hop_objective(1, 0, [0])
    res = minimize(fun, np.array([0.1]), OptimizeConfig(grad_tol=1e-10))
    assert res.f_star == pytest.approx(e_exact, abs=1e-8)


def test_converged_optimum_is_stationary():
    model = HubbardModel(GridSpec(3, 1), HubbardParams(1.0, 3.0, 1.5))
    engine = SectorEngine(model.hamiltonian(), Sector(1, 1), build_pool(3))
    ops = [op for op, g in zip(engine.bank.pool, engine.bank.generators) if not g.is_zero][:4]
    gens = engine.generators(ops)
    init = engine.basis_vector([0, 5])
    cfg = OptimizeConfig(grad_tol=1e-7, f_tol=1e-300)
    res = minimize(lambda x: energy_and_gradient(gens, x, engine.hamiltonian, init), np.full(4, 0.2), cfg)
    assert res.grad_norm <= cfg.grad_tol
    assert Ansatz(6, InitSpec.product([0, 5])).depth == 0
