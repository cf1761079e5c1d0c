"""Fermi-Hubbard Hamiltonian on small grids and the spin-conserving operator pool.

Modes are interleaved: ``mode = 2 * site + spin`` with spin 0 = up, 1 = down.
Sites are numbered row-major, ``site = y * width + x``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ResourceError, UnsupportedGeometryError, ValidationError
from .fermion import MAX_QUBITS, FermionOperator

MAX_SITES = MAX_QUBITS // 2
SPIN_LABELS = ("u", "d")

Boundary = Literal["open", "periodic-x", "periodic-xy"]


def mode_index(site: int, spin: int | str) -> int:
    return 2 * site + _spin_index(spin)


def _spin_index(spin: int | str) -> int:
    if spin in (0, "up", "u", "UP"):
        return 0
    if spin in (1, "down", "d", "DOWN", "dn"):
        return 1
    raise ValidationError(f"unknown spin label {spin!r}")


def mode_label(mode: int) -> str:
    return f"{mode // 2}{SPIN_LABELS[mode % 2]}"


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int = 1
    boundary: Boundary = "open"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        if self.boundary not in ("open", "periodic-x", "periodic-xy"):
            raise ValidationError(f"unknown boundary {self.boundary!r}")
        if self.width * self.height > MAX_SITES:
            raise ResourceError(
                f"{self.width}x{self.height} grid exceeds the {MAX_SITES}-site limit"
            )

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    @property
    def n_modes(self) -> int:
        return 2 * self.n_sites

    @property
    def is_chain(self) -> bool:
        return self.width == 1 or self.height == 1

    def site(self, x: int, y: int) -> int:
        return y * self.width + x

    def coords(self, site: int) -> tuple[int, int]:
        return site % self.width, site // self.width

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour pairs ``(i, j)`` with ``i < j``, no duplicates."""
        out = set()
        wrap_x = self.boundary in ("periodic-x", "periodic-xy")
        wrap_y = self.boundary == "periodic-xy"
        for y in range(self.height):
            for x in range(self.width):
                i = self.site(x, y)
                if x + 1 < self.width:
                    out.add((i, self.site(x + 1, y)))
                elif wrap_x and self.width > 2:
                    out.add(tuple(sorted((i, self.site(0, y)))))
                if y + 1 < self.height:
                    out.add((i, self.site(x, y + 1)))
                elif wrap_y and self.height > 2:
                    out.add(tuple(sorted((i, self.site(x, 0)))))
        return sorted(out)

    def label(self) -> str:
        return f"{self.width}x{self.height}"


@dataclass(frozen=True)
class HubbardParams:
    t: float = 1.0
    U: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        for name in ("t", "U", "mu"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")


@dataclass(frozen=True)
class HubbardModel:
    grid: GridSpec
    params: HubbardParams

    @property
    def n_sites(self) -> int:
        return self.grid.n_sites

    @property
    def n_modes(self) -> int:
        return self.grid.n_modes

    def hamiltonian(self) -> FermionOperator:
        return build_hamiltonian(self.grid, self.params)

    def hopping_matrix(self) -> np.ndarray:
        return hopping_matrix(self.grid, self.params.t)


def hopping_matrix(grid: GridSpec, t: float = 1.0) -> np.ndarray:
    """One-body matrix ``h_ij = -t`` on bonds, per spin species."""
    h = np.zeros((grid.n_sites, grid.n_sites))
    for i, j in grid.bonds():
        h[i, j] = h[j, i] = -t
    return h


def build_hamiltonian(grid: GridSpec, params: HubbardParams) -> FermionOperator:
    n = grid.n_modes
    terms: list[tuple[tuple, complex]] = []
    for i, j in grid.bonds():
        for s in (0, 1):
            p, q = mode_index(i, s), mode_index(j, s)
            terms.append((((p, True), (q, False)), -params.t))
            terms.append((((q, True), (p, False)), -params.t))
    for i in range(grid.n_sites):
        up, dn = mode_index(i, 0), mode_index(i, 1)
        terms.append((((up, True), (up, False), (dn, True), (dn, False)), params.U))
    for q in range(n):
        terms.append((((q, True), (q, False)), -params.mu))
    return FermionOperator(n, terms)


@dataclass(frozen=True)
class PoolOperator:
    """One pool generator, identified by its excitation indices.

    ``one_body`` with ``(i, j)`` is the hop ``c_i^ c_j``; ``two_body`` with
    ``(i, j, k, l)`` is ``c_i^ c_j^ c_k c_l``. Calling the excitation ``P``,
    the Hermitian generator is ``A = i (P^ - P)`` so that
    ``exp(i theta A) = exp(theta (P - P^))`` is a real rotation.
    """

    kind: Literal["one_body", "two_body"]
    indices: tuple[int, ...]
    n_modes: int = field(compare=False)

    @property
    def descriptor(self) -> str:
        tag = "1b" if self.kind == "one_body" else "2b"
        return f"{tag}(" + ",".join(str(i) for i in self.indices) + ")"

    @property
    def label(self) -> str:
        return f"{self.kind}(" + ",".join(mode_label(i) for i in self.indices) + ")"

    @property
    def sort_key(self) -> tuple:
        return (0 if self.kind == "one_body" else 1, self.indices)

    @classmethod
    def from_descriptor(cls, text: str, n_modes: int) -> PoolOperator:
        text = text.strip()
        try:
            tag, rest = text.split("(", 1)
            indices = tuple(int(v) for v in rest.rstrip(")").split(","))
        except ValueError as exc:
            raise ValidationError(f"malformed pool descriptor {text!r}") from exc
        kind = {"1b": "one_body", "2b": "two_body"}.get(tag)
        if kind is None or len(indices) != (2 if kind == "one_body" else 4):
            raise ValidationError(f"malformed pool descriptor {text!r}")
        if any(not 0 <= i < n_modes for i in indices):
            raise ValidationError(f"descriptor {text!r} out of range for {n_modes} modes")
        return cls(kind, indices, n_modes)

    @property
    def excitation_word(self) -> tuple[tuple[int, bool], ...]:
        if self.kind == "one_body":
            i, j = self.indices
            return ((i, True), (j, False))
        i, j, k, l = self.indices
        return ((i, True), (j, True), (k, False), (l, False))

    @functools.cached_property
    def excitation(self) -> FermionOperator:
        return FermionOperator(self.n_modes, {self.excitation_word: 1.0})

    @functools.cached_property
    def hermitian_generator(self) -> FermionOperator:
        p = self.excitation
        return p.adjoint() * 1j - p * 1j

    @property
    def is_correlated_hopping(self) -> bool:
        return self.kind == "two_body" and len(set(self.indices)) == 3

    @property
    def n_qubits_touched(self) -> int:
        return len(set(self.indices))


def build_pool(n_sites: int) -> list[PoolOperator]:
    """All same-spin hops and all number- and S_z-conserving pair excitations.

    Returned in canonical order: hops first, then pair terms, each
    lexicographic in their indices. Diagonal (``{i,j} == {k,l}``) terms are
    left out.
    """
    if 2 * n_sites > MAX_QUBITS:
        raise ResourceError(f"{n_sites} sites exceed the {MAX_SITES}-site limit")
    n = 2 * n_sites
    pool = [
        PoolOperator("one_body", (i, j), n)
        for i, j in itertools.combinations(range(n), 2)
        if i % 2 == j % 2
    ]
    pairs = list(itertools.combinations(range(n), 2))
    for (i, j), (k, l) in itertools.combinations(pairs, 2):
        if sorted((i % 2, j % 2)) == sorted((k % 2, l % 2)):
            pool.append(PoolOperator("two_body", (i, j, k, l), n))
    return pool


def momentum_mode(k_index: int, spin: int | str, grid: GridSpec) -> FermionOperator:
    """Annihilator of the ``k_index``-th single-particle mode of a chain.

    Periodic chains use plane waves; open chains use particle-in-a-box
    standing waves, whose ``k_index = 0, 1`` are the bonding and antibonding
    modes of the dimer.
    """
    if not grid.is_chain:
        raise UnsupportedGeometryError(f"momentum modes need a chain, got {grid.label()}")
    length = grid.n_sites
    if not 0 <= k_index < length:
        raise ValidationError(f"k_index {k_index} out of range for chain of length {length}")
    s = _spin_index(spin)
    x = np.arange(length)
    if grid.boundary == "open":
        coeffs = math.sqrt(2 / (length + 1)) * np.sin(math.pi * (k_index + 1) * (x + 1) / (length + 1))
    else:
        coeffs = np.exp(-2j * math.pi * k_index * x / length) / math.sqrt(length)
    terms = [(((mode_index(int(site), s), False),), c) for site, c in zip(x, coeffs)]
    return FermionOperator(grid.n_modes, terms)


def spread_occupation(grid: GridSpec, n_up: int, n_down: int) -> list[int]:
    """Product-state occupation with electrons spread evenly over the grid.

    Sites are chosen at evenly spaced positions in row-major order and filled
    site-major; spins alternate in a checkerboard where the grid allows it.
    Electrons beyond one per site doubly occupy the chosen sites in order.
    """
    n_sites = grid.n_sites
    if not (0 <= n_up <= n_sites and 0 <= n_down <= n_sites):
        raise ValidationError(f"sector ({n_up},{n_down}) does not fit {n_sites} sites")
    n_el = n_up + n_down
    n_single = min(n_el, n_sites)
    sites = sorted({int((i + 0.5) * n_sites / n_single) for i in range(n_single)}) if n_single else []
    # checkerboard parity picks the spin when both species are still available
    up_left, dn_left = n_up, n_down
    occupied = []
    for site in sites:
        x, y = grid.coords(site)
        prefer_up = (x + y) % 2 == 0
        if (prefer_up and up_left) or not dn_left:
            occupied.append(mode_index(site, 0))
            up_left -= 1
        else:
            occupied.append(mode_index(site, 1))
            dn_left -= 1
    for site in sites:
        if up_left and mode_index(site, 0) not in occupied:
            occupied.append(mode_index(site, 0))
            up_left -= 1
        if dn_left and mode_index(site, 1) not in occupied:
            occupied.append(mode_index(site, 1))
            dn_left -= 1
    for site in range(n_sites):
        if up_left and mode_index(site, 0) not in occupied:
            occupied.append(mode_index(site, 0))
            up_left -= 1
        if dn_left and mode_index(site, 1) not in occupied:
            occupied.append(mode_index(site, 1))
            dn_left -= 1
    return sorted(occupied)
