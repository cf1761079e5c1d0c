"""INI-style run configuration, validated with pydantic.

Example::

    [run]
    task = ground

    [grid]
    width = 3
    height = 1

    [params]
    U = 6
    mu_mode = half_filling_shift

    [sector]
    n_up = 1
    n_down = 1
"""

from __future__ import annotations

import configparser
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, field_validator

from .adapt import AdaptConfig, InitSpec
from .errors import ConfigError
from .exact_diag import Sector
from .hubbard import GridSpec, HubbardModel, HubbardParams
from .optimizer import OptimizeConfig

TASKS = ("ground", "excited", "greens", "ed", "pool")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RunSection(_Section):
    task: Literal["ground", "excited", "greens", "ed", "pool"] = "ground"
    output_dir: str = "runs/latest"
    seed: int = 0


class GridSection(_Section):
    width: int = Field(ge=1)
    height: int = Field(default=1, ge=1)
    boundary: Literal["open", "periodic-x", "periodic-xy"] = "open"


class ParamsSection(_Section):
    t: float = 1.0
    U: float = 0.0
    mu: float = 0.0
    mu_mode: Literal["none", "half_filling_shift"] = "none"


class SectorSection(_Section):
    n_up: int = Field(ge=0)
    n_down: int = Field(ge=0)


class InitSection(_Section):
    kind: Literal["auto", "product", "slater"] = "auto"
    occupied: tuple[int, ...] = ()

    @field_validator("occupied", mode="before")
    @classmethod
    def _split(cls, v):
        if isinstance(v, str):
            return tuple(int(x) for x in v.replace(",", " ").split())
        return v


class AdaptSection(_Section):
    epsilon: float = Field(default=1e-4, ge=0)
    delta: float = Field(default=1e-3, ge=0)
    grad_stop: float = Field(default=1e-6, ge=0)
    max_depth: int = Field(default=200, ge=0)
    target_fidelity: float | None = Field(default=None, gt=0, le=1)
    track_fidelity: bool = True

    @field_validator("target_fidelity", mode="before")
    @classmethod
    def _none(cls, v):
        return None if isinstance(v, str) and v.strip().lower() in ("", "none") else v


class OptimizerSection(_Section):
    grad_tol: float = Field(default=1e-6, gt=0)
    f_tol: float = Field(default=1e-10, gt=0)
    max_iters: int = Field(default=500, gt=0)
    history_size: int = Field(default=10, gt=0)


class SsvqeSection(_Section):
    k: int | None = Field(default=None, ge=1)
    weights: tuple[float, ...] | None = None

    @field_validator("k", "weights", mode="before")
    @classmethod
    def _parse(cls, v, info):
        if isinstance(v, str):
            if v.strip().lower() in ("", "none", "auto"):
                return None
            if info.field_name == "weights":
                return tuple(float(x) for x in v.replace(",", " ").split())
        return v


class GreensSection(_Section):
    source: Literal["ed", "adapt_ssvqe"] = "ed"
    nu: float = Field(default=0.1, gt=0)
    omega_min: float = -10.0
    omega_max: float = 10.0
    omega_step: float = Field(default=0.01, gt=0)
    modes: tuple[tuple[int, Literal["up", "down"]], ...] | None = None

    @field_validator("modes", mode="before")
    @classmethod
    def _modes(cls, v):
        if isinstance(v, str):
            if v.strip().lower() in ("", "none", "all"):
                return None
            out = []
            for tok in v.replace(",", " ").split():
                k, _, spin = tok.partition(":")
                out.append((int(k), spin or "up"))
            return tuple(out)
        return v


class RunConfig(_Section):
    run: RunSection = RunSection()
    grid: GridSection
    params: ParamsSection = ParamsSection()
    sector: SectorSection
    init: InitSection = InitSection()
    adapt: AdaptSection = AdaptSection()
    optimizer: OptimizerSection = OptimizerSection()
    ssvqe: SsvqeSection = SsvqeSection()
    greens: GreensSection = GreensSection()

    # ---- derived domain objects -------------------------------------------
    def grid_spec(self) -> GridSpec:
        return GridSpec(self.grid.width, self.grid.height, self.grid.boundary)

    def hubbard_params(self) -> HubbardParams:
        p = self.params
        mu = p.U / 2 if p.mu_mode == "half_filling_shift" else p.mu
        return HubbardParams(p.t, p.U, mu)

    def model(self) -> HubbardModel:
        return HubbardModel(self.grid_spec(), self.hubbard_params())

    def sector_obj(self) -> Sector:
        return Sector(self.sector.n_up, self.sector.n_down)

    def init_spec(self) -> InitSpec:
        if self.init.kind == "product":
            return InitSpec.product(self.init.occupied)
        if self.init.kind == "slater":
            return InitSpec.slater(self.sector.n_up, self.sector.n_down)
        return InitSpec.spread(self.model(), self.sector_obj())

    def adapt_config(self) -> AdaptConfig:
        a, o = self.adapt, self.optimizer
        return AdaptConfig(
            epsilon=a.epsilon,
            delta=a.delta,
            grad_stop=a.grad_stop,
            max_depth=a.max_depth,
            target_fidelity=a.target_fidelity,
            optimizer=OptimizeConfig(o.grad_tol, o.f_tol, o.max_iters, o.history_size),
        )

    def with_task(self, task: str) -> RunConfig:
        return self.model_copy(update={"run": self.run.model_copy(update={"task": task})})

    def with_output_dir(self, path: str) -> RunConfig:
        return self.model_copy(update={"run": self.run.model_copy(update={"output_dir": str(path)})})


def _check_physics(cfg: RunConfig) -> None:
    n_sites = cfg.grid.width * cfg.grid.height
    try:
        grid = cfg.grid_spec()
    except Exception as exc:  # resource guard or invalid boundary
        raise ConfigError(f"[grid] {exc}") from exc
    if cfg.sector.n_up > n_sites or cfg.sector.n_down > n_sites:
        raise ConfigError(
            f"[sector] ({cfg.sector.n_up},{cfg.sector.n_down}) exceeds {n_sites} sites per spin"
        )
    if cfg.init.kind == "product":
        occ = cfg.init.occupied
        if len(set(occ)) != len(occ) or any(not 0 <= m < grid.n_modes for m in occ):
            raise ConfigError(f"[init] occupied modes {occ} invalid for {grid.n_modes} modes")
        n_up = sum(1 for m in occ if m % 2 == 0)
        if (n_up, len(occ) - n_up) != (cfg.sector.n_up, cfg.sector.n_down):
            raise ConfigError(f"[init] occupation {occ} is not in sector ({cfg.sector.n_up},{cfg.sector.n_down})")
    if cfg.ssvqe.weights is not None:
        w = cfg.ssvqe.weights
        if cfg.ssvqe.k is not None and len(w) != cfg.ssvqe.k:
            raise ConfigError(f"[ssvqe] {len(w)} weights given for k={cfg.ssvqe.k}")
        if any(x <= 0 for x in w) or any(b >= a for a, b in zip(w, w[1:])):
            raise ConfigError("[ssvqe] weights must be positive and strictly descending")
    if cfg.greens.omega_max < cfg.greens.omega_min:
        raise ConfigError("[greens] omega_max must be >= omega_min")


def from_mapping(data: dict) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(data)
    except PydanticValidationError as exc:
        msgs = []
        for err in exc.errors():
            loc = err["loc"]
            where = f"[{loc[0]}] {'.'.join(str(p) for p in loc[1:])}" if loc else "config"
            msgs.append(f"{where}: {err['msg']} (got {err.get('input')!r})")
        raise ConfigError("; ".join(msgs)) from None
    _check_physics(cfg)
    return cfg


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep "U" case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    data = {name: dict(parser[name]) for name in parser.sections()}
    return from_mapping(data)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return " ".join(f"{k}:{s}" for k, s in v)
        return " ".join(_fmt(x) for x in v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for section in RunConfig.model_fields:
        block = getattr(cfg, section)
        lines.append(f"[{section}]")
        for key in type(block).model_fields:
            lines.append(f"{key} = {_fmt(getattr(block, key))}")
        lines.append("")
    return "\n".join(lines)
