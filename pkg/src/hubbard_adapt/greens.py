"""Zero-temperature retarded Green's function from a Lehmann sum.

    G(w) = sum_n  w+_n / (w + E_G - E_n + i nu)  +  w-_n / (w - E_G + E_n + i nu)

with particle weights ``w+_n = |<E_n|c_k^|G>|^2`` over the N+1 sector and hole
weights ``w-_n = |<E_n|c_k|G>|^2`` over the N-1 sector. ``A = -Im G / pi``.
Amplitudes are plain inner products on the simulated statevectors.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .adapt import AdaptConfig, run_adapt
from .circuit import SectorEngine
from .errors import ValidationError
from .exact_diag import Sector, full_spectrum, ground_state
from .fermion import FermionOperator, fermion_matrix
from .hubbard import HubbardModel, build_pool, momentum_mode
from .ssvqe import SubspaceSpec, run_adapt_ssvqe
from .statevector import StateVector

Eigenpair = tuple[float, StateVector]

DEFAULT_NU = 0.1
DEFAULT_OMEGA = (-10.0, 10.0, 0.01)
OMEGA_CONVENTION = "absolute omega of the Hamiltonian including the -mu N term"

# tight thresholds: Lehmann weights need converged states, not Table-I stopping
GREENS_ADAPT_CONFIG = AdaptConfig(epsilon=1e-12, delta=1e-7, max_depth=200)


@dataclass(frozen=True)
class LehmannData:
    ground_energy: float
    particle_terms: tuple[tuple[float, float], ...]
    hole_terms: tuple[tuple[float, float], ...]
    mode_label: tuple[int, str]

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, w in self.particle_terms) + sum(w for _, w in self.hole_terms))


@dataclass(frozen=True, eq=False)
class SpectralData:
    omega_grid: np.ndarray
    G_values: np.ndarray
    A_values: np.ndarray
    nu: float
    mode_label: tuple[int, str] = (0, "up")
    meta: dict = field(default_factory=dict)


def omega_grid(omega_min: float = DEFAULT_OMEGA[0], omega_max: float = DEFAULT_OMEGA[1], step: float = DEFAULT_OMEGA[2]) -> np.ndarray:
    """Inclusive grid; built from integer multiples of ``step`` so it is exactly symmetric when the bounds are."""
    if step <= 0 or omega_max < omega_min:
        raise ValidationError("omega grid needs step > 0 and omega_max >= omega_min")
    n = int(round((omega_max - omega_min) / step))
    return omega_min + step * np.arange(n + 1)


def _particle_number(state: StateVector) -> float:
    idx = np.arange(state.dim, dtype=np.int64)
    return float(np.sum(np.bitwise_count(idx) * np.abs(state.amplitudes) ** 2))


def transition_amplitudes(
    ground: StateVector,
    excited: Sequence[Eigenpair],
    mode_op: FermionOperator,
    ground_energy: float,
    mode_label: tuple[int, str] = (0, "up"),
) -> LehmannData:
    """Lehmann weights of ``mode_op`` (an annihilator) between the ground and excited states.

    Each excited state must have exactly one particle more (particle term)
    or one fewer (hole term) than the ground state.
    """
    n0 = _particle_number(ground)
    if abs(n0 - round(n0)) > 1e-8:
        raise ValidationError("ground state has no definite particle number")
    annihilate = fermion_matrix(mode_op)
    hole_vec = annihilate @ ground.amplitudes
    part_vec = annihilate.conj().T @ ground.amplitudes
    particle, hole = [], []
    for energy, state in excited:
        n = _particle_number(state)
        if abs(n - (n0 + 1)) < 1e-8:
            particle.append((float(energy), float(abs(np.vdot(state.amplitudes, part_vec)) ** 2)))
        elif abs(n - (n0 - 1)) < 1e-8:
            hole.append((float(energy), float(abs(np.vdot(state.amplitudes, hole_vec)) ** 2)))
        else:
            raise ValidationError(
                f"excited state with N={n:.6f} is in neither the N+1 nor N-1 sector (N={n0:.0f})"
            )
    return LehmannData(float(ground_energy), tuple(particle), tuple(hole), mode_label)


def propagator(data: LehmannData, omega: np.ndarray, nu: float = DEFAULT_NU) -> SpectralData:
    if not nu > 0:
        raise ValidationError(f"broadening nu must be positive, got {nu}")
    omega = np.asarray(omega, dtype=float)
    if omega.size > 1 and np.any(np.diff(omega) <= 0):
        raise ValidationError("omega grid must be strictly ascending")
    eg = data.ground_energy
    g = np.zeros(omega.size, dtype=complex)
    for en, w in data.particle_terms:
        g += w / (omega + eg - en + 1j * nu)
    for en, w in data.hole_terms:
        g += w / (omega - eg + en + 1j * nu)
    a = -g.imag / np.pi
    return SpectralData(omega, g, a, float(nu), data.mode_label)


@dataclass
class ModeSpectrum:
    mode: tuple[int, str]
    lehmann: LehmannData
    spectrum: SpectralData
    coverage: float


@dataclass
class SpectralRun:
    source: str
    ground_energy: float
    ground_state: StateVector
    modes: list[ModeSpectrum]
    meta: dict


def _spin_index(spin) -> int:
    return 0 if spin in (0, "up", "u") else 1


def _excitation_pairs(
    model: HubbardModel,
    sector: Sector,
    source: str,
    config: AdaptConfig,
    pool,
    meta: dict,
) -> dict[int, list[Eigenpair]]:
    """Eigenpairs of the N+1 and N-1 sectors reached by each spin species."""
    h = model.hamiltonian()
    n_sites = model.n_sites
    out: dict[int, list[Eigenpair]] = {}
    for spin in (0, 1):
        pairs: list[Eigenpair] = []
        n_spin = sector.n_up if spin == 0 else sector.n_down
        for delta in (+1, -1):
            if not 0 <= n_spin + delta <= n_sites:
                continue
            target = sector.shifted(spin, delta)
            if source == "ed":
                res = full_spectrum(h, target)
                pairs.extend(zip(res.energies.tolist(), res.states))
                meta.setdefault("sectors", {})[str(target)] = {"k": len(res), "dim": int(res.basis.size)}
            else:
                engine = SectorEngine(h, target, pool)
                spec = SubspaceSpec.default(engine)
                res = run_adapt_ssvqe(model, spec, config, engine=engine)
                pairs.extend(zip(res.energies.tolist(), res.states))
                meta.setdefault("sectors", {})[str(target)] = {
                    "k": spec.k,
                    "dim": engine.dim,
                    "n_parameters": res.n_parameters,
                    "stop_reason": res.stop_reason,
                    "ordering_violation": res.ordering_violation,
                }
        out[spin] = pairs
    return out


def spectral_pipeline(
    model: HubbardModel,
    sector: Sector,
    source: Literal["ed", "adapt_ssvqe"] = "ed",
    modes: Sequence[tuple[int, str]] | None = None,
    omega: np.ndarray | None = None,
    nu: float = DEFAULT_NU,
    config: AdaptConfig = GREENS_ADAPT_CONFIG,
) -> SpectralRun:
    """Ground state, excitation-sector states, Lehmann weights and spectra per mode."""
    if source not in ("ed", "adapt_ssvqe"):
        raise ValidationError(f"unknown spectral source {source!r}")
    sector.validate(model.n_modes)
    grid = model.grid
    modes = [(k, "up") for k in range(grid.n_sites)] if modes is None else list(modes)
    omega = omega_grid() if omega is None else np.asarray(omega, dtype=float)
    h = model.hamiltonian()
    meta: dict = {"source": source, "omega_convention": OMEGA_CONVENTION, "nu": nu}
    if source == "ed":
        e0, g0, degenerate = ground_state(h, sector)
        meta["ground_degenerate"] = degenerate
        pool = None
    else:
        pool = build_pool(model.n_sites)
        gs = run_adapt(model, sector, None, config, track_fidelity=True, pool=pool)
        e0, g0 = gs.energy, gs.state
        meta["ground_depth"] = gs.depth
        meta["ground_fidelity"] = gs.fidelity
    excitations = _excitation_pairs(model, sector, source, config, pool, meta)
    results = []
    for k, spin in modes:
        op = momentum_mode(k, spin, grid)
        data = transition_amplitudes(g0, excitations[_spin_index(spin)], op, e0, (k, spin))
        spec = propagator(data, omega, nu)
        results.append(ModeSpectrum((k, spin), data, spec, data.total_weight))
    return SpectralRun(source, float(e0), g0, results, meta)
