"""Adaptive ansatz construction: gradient screening, growth and re-optimization."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .circuit import CompiledGenerator, PoolBank, SectorEngine, energy_and_gradient, prepare
from .errors import ConfigError, ValidationError
from .exact_diag import Sector, ground_state, sector_basis
from .hubbard import HubbardModel, PoolOperator, build_pool, spread_occupation
from .optimizer import OptimizeConfig, minimize
from .statevector import StateVector, fix_phase, slater_state

log = logging.getLogger(__name__)

ANSATZ_HEADER = "hubbard-adapt ansatz v1"
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class InitSpec:
    """Reference state(s) the ansatz acts on.

    ``product`` is one occupation-basis state, ``slater`` the non-interacting
    ground state of the model, ``subspace`` a list of occupation-basis states
    (one per target eigenstate of the multi-state cost).
    """

    kind: Literal["product", "slater", "subspace"]
    occupied: tuple[int, ...] = ()
    n_up: int = 0
    n_down: int = 0
    states: tuple[tuple[int, ...], ...] = ()

    @classmethod
    def product(cls, occupied: Sequence[int]) -> InitSpec:
        return cls("product", occupied=tuple(sorted(int(m) for m in occupied)))

    @classmethod
    def slater(cls, n_up: int, n_down: int) -> InitSpec:
        return cls("slater", n_up=n_up, n_down=n_down)

    @classmethod
    def subspace(cls, states: Sequence[Sequence[int]]) -> InitSpec:
        return cls("subspace", states=tuple(tuple(sorted(int(m) for m in s)) for s in states))

    @classmethod
    def spread(cls, model: HubbardModel, sector: Sector) -> InitSpec:
        return cls.product(spread_occupation(model.grid, sector.n_up, sector.n_down))

    def sector(self) -> Sector:
        if self.kind == "slater":
            return Sector(self.n_up, self.n_down)
        occ = self.occupied if self.kind == "product" else self.states[0]
        return Sector(sum(1 for m in occ if m % 2 == 0), sum(1 for m in occ if m % 2 == 1))

    def block(self, engine: SectorEngine, model: HubbardModel | None = None) -> np.ndarray:
        """Initial sector amplitudes: a vector, or one column per subspace state."""
        if self.kind == "product":
            return engine.basis_vector(self.occupied)
        if self.kind == "subspace":
            return np.column_stack([engine.basis_vector(s) for s in self.states])
        if model is None:
            raise ValidationError("slater initial state needs the model's hopping matrix")
        full = slater_state(model.hopping_matrix(), self.n_up, self.n_down)
        return engine.restrict(full.amplitudes)

    def to_text(self) -> str:
        if self.kind == "product":
            return "product " + " ".join(str(m) for m in self.occupied)
        if self.kind == "slater":
            return f"slater {self.n_up} {self.n_down}"
        return "subspace " + ";".join(",".join(str(m) for m in s) for s in self.states)

    @classmethod
    def from_text(cls, text: str) -> InitSpec:
        kind, _, rest = text.strip().partition(" ")
        rest = rest.strip()
        if kind == "product":
            return cls.product([int(v) for v in rest.split()])
        if kind == "slater":
            n_up, n_down = (int(v) for v in rest.split())
            return cls.slater(n_up, n_down)
        if kind == "subspace":
            return cls.subspace([[int(v) for v in chunk.split(",") if v] for chunk in rest.split(";")])
        raise ValidationError(f"unknown initial-state kind {kind!r}")


@dataclass(frozen=True)
class Ansatz:
    n_modes: int
    init: InitSpec
    steps: tuple[tuple[PoolOperator, float], ...] = ()

    @property
    def depth(self) -> int:
        return len(self.steps)

    @property
    def operators(self) -> list[PoolOperator]:
        return [op for op, _ in self.steps]

    @property
    def thetas(self) -> np.ndarray:
        return np.array([th for _, th in self.steps], dtype=float)

    def with_thetas(self, thetas: Sequence[float]) -> Ansatz:
        if len(thetas) != self.depth:
            raise ValidationError(f"expected {self.depth} angles, got {len(thetas)}")
        return replace(self, steps=tuple((op, float(th)) for (op, _), th in zip(self.steps, thetas)))

    def appended(self, op: PoolOperator, theta: float = 0.0) -> Ansatz:
        return replace(self, steps=self.steps + ((op, float(theta)),))

    def dumps(self) -> str:
        lines = [ANSATZ_HEADER, f"n_modes {self.n_modes}", f"init {self.init.to_text()}"]
        lines += [f"step {op.descriptor} {th:.17g}" for op, th in self.steps]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> Ansatz:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or lines[0] != ANSATZ_HEADER:
            raise ValidationError("not a hubbard-adapt ansatz file (missing version header)")
        n_modes = init = None
        steps = []
        for ln in lines[1:]:
            key, _, rest = ln.partition(" ")
            if key == "n_modes":
                n_modes = int(rest)
            elif key == "init":
                init = InitSpec.from_text(rest)
            elif key == "step":
                if n_modes is None:
                    raise ValidationError("step before n_modes in ansatz file")
                desc, angle = rest.split()
                steps.append((PoolOperator.from_descriptor(desc, n_modes), float(angle)))
            else:
                raise ValidationError(f"unknown ansatz line {ln!r}")
        if n_modes is None or init is None:
            raise ValidationError("ansatz file lacks n_modes or init")
        return cls(n_modes, init, tuple(steps))

    def prepare_state(self, model: HubbardModel) -> StateVector:
        """Full-space statevector of the (first) reference state evolved by the ansatz."""
        sector = self.init.sector()
        basis = sector_basis(self.n_modes, sector)
        engine = SectorEngine(model.hamiltonian(), sector, self.operators)
        block = self.init.block(engine, model)
        vec = prepare(engine.generators(self.operators), self.thetas, block)
        if vec.ndim == 2:
            vec = vec[:, 0]
        return StateVector.embed(vec, basis, self.n_modes)


@dataclass(frozen=True)
class AdaptConfig:
    """Growth and stopping controls.

    Attributes:
        epsilon: stop once one step lowers the energy by less than this.
        delta: stop once the largest pool gradient magnitude falls below this.
        grad_stop: stop once the pool gradient norm falls below this.
        max_depth: hard cap on the number of operators.
        target_fidelity: stop as soon as the tracked fidelity reaches this.
        optimizer: settings for each re-optimization.

    A zero threshold disables that rule.
    """

    epsilon: float = 1e-4
    delta: float = 1e-3
    grad_stop: float = 1e-6
    max_depth: int = 200
    target_fidelity: float | None = None
    optimizer: OptimizeConfig = field(default_factory=OptimizeConfig)

    def __post_init__(self):
        for name in ("epsilon", "delta", "grad_stop"):
            if getattr(self, name) < 0:
                raise ConfigError(f"AdaptConfig.{name} must be non-negative")
        if self.max_depth < 0:
            raise ConfigError("AdaptConfig.max_depth must be non-negative")
        if self.target_fidelity is not None and not 0 < self.target_fidelity <= 1:
            raise ConfigError("target_fidelity must lie in (0, 1]")


@dataclass(frozen=True)
class StepRecord:
    depth: int
    selected_operator: str | None
    selected_label: str | None
    pool_gradient: float
    energy: float
    fidelity: float | None
    param_snapshot: tuple[float, ...]
    optimizer_iterations: int = 0
    state_energies: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        out = {
            "depth": self.depth,
            "selected_operator": self.selected_operator,
            "selected_label": self.selected_label,
            "pool_gradient": self.pool_gradient,
            "energy": self.energy,
            "fidelity": self.fidelity,
            "params": list(self.param_snapshot),
            "optimizer_iterations": self.optimizer_iterations,
        }
        if self.state_energies is not None:
            out["state_energies"] = list(self.state_energies)
        return out


@dataclass
class AdaptResult:
    ansatz: Ansatz
    records: list[StepRecord]
    state: StateVector
    stop_reason: str
    energy: float
    exact_energy: float | None = None
    fidelity: float | None = None

    def __iter__(self):
        return iter((self.ansatz, self.records, self.state))

    @property
    def depth(self) -> int:
        return self.ansatz.depth

    def depth_to_fidelity(self, target: float) -> int | None:
        for rec in self.records:
            if rec.fidelity is not None and rec.fidelity >= target:
                return rec.depth
        return None


def pool_gradients(state: StateVector, h_matrix, pool: Sequence[PoolOperator]) -> np.ndarray:
    """Energy derivative ``i <psi|[H, A_m]|psi>`` for appending each pool generator."""
    h = sp.csr_matrix(h_matrix)
    if h.shape != (state.dim, state.dim):
        raise ValidationError(f"Hamiltonian shape {h.shape} does not match state dim {state.dim}")
    basis = np.arange(state.dim, dtype=np.int64)
    bank = PoolBank(pool, basis)
    psi = state.amplitudes
    return bank.gradients(psi, h @ psi)


def select_operator(gradients: np.ndarray) -> int:
    """Index of the largest ``|gradient|``; near-ties go to the lowest index."""
    mags = np.abs(gradients)
    top = mags.max()
    return int(np.flatnonzero(mags >= top * (1 - TIE_RTOL))[0])


class AdaptProblem:
    """A compiled engine plus the reference block and cost weights."""

    def __init__(
        self,
        engine: SectorEngine,
        init: InitSpec,
        model: HubbardModel | None = None,
        weights: Sequence[float] | None = None,
    ):
        self.engine = engine
        self.init = init
        self.block = init.block(engine, model)
        if self.block.ndim == 2 and self.block.shape[1] == 1 and (weights is None or float(weights[0]) == 1.0):
            # one unit-weight state: same arithmetic as a plain ground-state run
            self.block = self.block[:, 0]
        if self.block.ndim == 2:
            self.weights = np.ones(self.block.shape[1]) if weights is None else np.asarray(weights, float)
        else:
            self.weights = None

    def generators(self, ansatz: Ansatz) -> list[CompiledGenerator]:
        return self.engine.generators(ansatz.operators)

    def objective(self, gens: Sequence[CompiledGenerator]) -> Callable[[np.ndarray], tuple[float, np.ndarray]]:
        h = self.engine.hamiltonian

        def fun(x):
            return energy_and_gradient(gens, x, h, self.block, self.weights)

        return fun

    def states(self, ansatz: Ansatz) -> np.ndarray:
        return prepare(self.generators(ansatz), ansatz.thetas, self.block)

    def cost(self, ansatz: Ansatz) -> float:
        return self.objective(self.generators(ansatz))(ansatz.thetas)[0]

    def screen(self, ansatz: Ansatz) -> np.ndarray:
        psi = self.states(ansatz)
        lam = self.engine.hamiltonian @ psi
        if psi.ndim == 2:
            lam = lam * self.weights[None, :]
        return self.engine.bank.gradients(psi, lam)

    def state_energies(self, ansatz: Ansatz) -> np.ndarray:
        psi = self.states(ansatz)
        if psi.ndim == 1:
            psi = psi[:, None]
        return np.real(np.sum(np.conj(psi) * (self.engine.hamiltonian @ psi), axis=0))


def adapt_step(
    problem: AdaptProblem,
    current: Ansatz,
    optimizer_config: OptimizeConfig = OptimizeConfig(),
    grad_stop: float = 1e-6,
    gradients: np.ndarray | None = None,
) -> tuple[Ansatz, StepRecord | None]:
    """Append the steepest pool generator and re-optimize every angle.

    Returns ``(current, None)`` when the pool gradient norm is below
    ``grad_stop``: the ansatz cannot be grown usefully.
    """
    grads = problem.screen(current) if gradients is None else gradients
    if np.linalg.norm(grads) < grad_stop:
        return current, None
    m = select_operator(grads)
    op = problem.engine.bank.pool[m]
    grown = current.appended(op, 0.0)
    res = minimize(problem.objective(problem.generators(grown)), grown.thetas, optimizer_config)
    grown = grown.with_thetas(res.x_star)
    record = StepRecord(
        depth=grown.depth,
        selected_operator=op.descriptor,
        selected_label=op.label,
        pool_gradient=float(grads[m]),
        energy=float(res.f_star),
        fidelity=None,
        param_snapshot=tuple(float(v) for v in res.x_star),
        optimizer_iterations=res.iterations,
    )
    return grown, record


def adapt_loop(
    problem: AdaptProblem,
    config: AdaptConfig,
    fidelity_fn: Callable[[np.ndarray], float] | None = None,
    on_step: Callable[[StepRecord], None] | None = None,
) -> tuple[Ansatz, list[StepRecord], str]:
    ansatz = Ansatz(problem.engine.n_modes, problem.init)
    multi = problem.init.kind == "subspace"

    def record_extras(rec: StepRecord, a: Ansatz) -> StepRecord:
        fid = fidelity_fn(problem.states(a)) if fidelity_fn is not None else None
        energies = tuple(float(e) for e in problem.state_energies(a)) if multi else None
        return replace(rec, fidelity=fid, state_energies=energies)

    energy = problem.cost(ansatz)
    first = record_extras(StepRecord(0, None, None, 0.0, energy, None, ()), ansatz)
    records = [first]
    if on_step:
        on_step(first)
    if config.target_fidelity is not None and first.fidelity is not None and first.fidelity >= config.target_fidelity:
        return ansatz, records, "target_fidelity"
    while True:
        grads = problem.screen(ansatz)
        if np.linalg.norm(grads) < config.grad_stop:
            reason = "pool_gradient_norm"
            break
        if np.abs(grads).max() < config.delta:
            reason = "delta"
            break
        if ansatz.depth >= config.max_depth:
            reason = "max_depth"
            break
        ansatz, rec = adapt_step(problem, ansatz, config.optimizer, config.grad_stop, grads)
        rec = record_extras(rec, ansatz)
        records.append(rec)
        if on_step:
            on_step(rec)
        log.info("depth %d: %s E=%.12f fid=%s", rec.depth, rec.selected_label, rec.energy, rec.fidelity)
        if config.target_fidelity is not None and rec.fidelity is not None and rec.fidelity >= config.target_fidelity:
            reason = "target_fidelity"
            break
        if energy - rec.energy < config.epsilon:
            reason = "epsilon"
            break
        energy = rec.energy
    return ansatz, records, reason


def run_adapt(
    model: HubbardModel,
    sector: Sector,
    init: InitSpec | None = None,
    config: AdaptConfig = AdaptConfig(),
    track_fidelity: bool = True,
    pool: Sequence[PoolOperator] | None = None,
    on_step: Callable[[StepRecord], None] | None = None,
) -> AdaptResult:
    """Grow an adaptive ansatz for the ground state of ``model`` in ``sector``.

    With ``track_fidelity`` the sector ground state from exact diagonalization
    is used to report fidelities; a degenerate ground state is rejected since
    fidelity against it is ill-defined.
    """
    sector.validate(model.n_modes)
    init = InitSpec.spread(model, sector) if init is None else init
    if init.kind == "subspace":
        raise ValidationError("run_adapt prepares one state; use run_adapt_ssvqe for subspaces")
    if init.sector() != sector:
        raise ValidationError(f"initial state lies in sector {init.sector()}, not {sector}")
    hamiltonian = model.hamiltonian()
    pool = build_pool(model.n_sites) if pool is None else pool
    engine = SectorEngine(hamiltonian, sector, pool)
    problem = AdaptProblem(engine, init, model)

    fidelity_fn = None
    exact_energy = None
    if track_fidelity or config.target_fidelity is not None:
        exact_energy, ground, degenerate = ground_state(hamiltonian, sector)
        if degenerate:
            raise ConfigError(
                f"ground state of {model.grid.label()} in sector {sector} is degenerate; "
                "fidelity is ambiguous, pick a filling with a unique ground state"
            )
        target = engine.restrict(ground.amplitudes)

        def fidelity_fn(psi):
            return float(abs(np.vdot(target, psi)) ** 2)

    ansatz, records, reason = adapt_loop(problem, config, fidelity_fn, on_step)
    vec = problem.states(ansatz)
    state = StateVector.embed(fix_phase(vec), engine.basis, engine.n_modes)
    last = records[-1]
    return AdaptResult(ansatz, records, state, reason, last.energy, exact_energy, last.fidelity)
