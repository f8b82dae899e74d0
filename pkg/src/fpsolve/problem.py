"""Versioned JSON problem specification.

Every key is checked: unknown keys, wrong types and out-of-range values
raise :class:`SpecError`.  ``to_json`` always emits the fully resolved form
(defaults filled in), so ``from_json(to_json(spec)) == spec``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .catalog import FAMILY_NAMES, make_family
from .errors import FPSolveError, SpecError
from .suite import DEFAULT_TOLERANCES, Settings

SCHEMA_VERSION = 1


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise SpecError(f"{where} must be an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise SpecError(f"unknown key(s) in {where}: {sorted(extra)}")


def _num(v, where, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{where} must be a number, got {v!r}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise SpecError(f"{where} must be an integer, got {v!r}")
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        raise SpecError(f"{where} must be finite")
    return v


@dataclass
class FamilySpec:
    name: str = "harmonic"
    params: dict = field(default_factory=dict)


@dataclass
class GridSpec:
    N: int = 2000
    eps: float = 1e-12
    bounds: Optional[list] = None  # replaces infinite ends of each nodal domain


@dataclass
class RunSpec:
    dt: float = 1e-3
    T: float = 8.0
    seed: int = 42
    chains: int = 1000
    steps: int = 1250
    burn_in: int = 250
    langevin_dt: float = 0.02
    n_modes: int = 8
    bins: int = 100
    save_every: int = 100
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


@dataclass
class ProblemSpec:
    family: FamilySpec = field(default_factory=FamilySpec)
    level: int = 0
    offset: float = 0.0
    grid: GridSpec = field(default_factory=GridSpec)
    run: RunSpec = field(default_factory=RunSpec)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_json(cls, obj: dict) -> "ProblemSpec":
        top = ("schema_version", "family", "level", "offset", "grid", "run")
        _check_keys(obj, top, "spec")
        version = obj.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise SpecError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        fam = obj.get("family", {})
        _check_keys(fam, ("name", "params"), "family")
        params = fam.get("params", {})
        if not isinstance(params, dict):
            raise SpecError("family.params must be an object")
        family = FamilySpec(str(fam.get("name", "harmonic")),
                            {k: _num(v, f"family.params.{k}") for k, v in params.items()})
        g = obj.get("grid", {})
        _check_keys(g, [f.name for f in fields(GridSpec)], "grid")
        bounds = g.get("bounds")
        if bounds is not None:
            if not (isinstance(bounds, list) and len(bounds) == 2):
                raise SpecError("grid.bounds must be [lo, hi] or null")
            bounds = [_num(b, "grid.bounds") for b in bounds]
        grid = GridSpec(_num(g.get("N", 2000), "grid.N", integer=True),
                        _num(g.get("eps", 1e-12), "grid.eps"), bounds)
        r = obj.get("run", {})
        _check_keys(r, [f.name for f in fields(RunSpec)], "run")
        d = RunSpec()
        tols = r.get("tolerances", {})
        _check_keys(tols, DEFAULT_TOLERANCES, "run.tolerances")
        run = RunSpec(
            dt=_num(r.get("dt", d.dt), "run.dt"),
            T=_num(r.get("T", d.T), "run.T"),
            seed=_num(r.get("seed", d.seed), "run.seed", integer=True),
            chains=_num(r.get("chains", d.chains), "run.chains", integer=True),
            steps=_num(r.get("steps", d.steps), "run.steps", integer=True),
            burn_in=_num(r.get("burn_in", d.burn_in), "run.burn_in", integer=True),
            langevin_dt=_num(r.get("langevin_dt", d.langevin_dt), "run.langevin_dt"),
            n_modes=_num(r.get("n_modes", d.n_modes), "run.n_modes", integer=True),
            bins=_num(r.get("bins", d.bins), "run.bins", integer=True),
            save_every=_num(r.get("save_every", d.save_every), "run.save_every", integer=True),
            tolerances={**DEFAULT_TOLERANCES,
                        **{k: _num(v, f"run.tolerances.{k}") for k, v in tols.items()}},
        )
        spec = cls(family, _num(obj.get("level", 0), "level", integer=True),
                   _num(obj.get("offset", 0.0), "offset"), grid, run)
        return spec.resolved()

    @classmethod
    def loads(cls, text: str) -> "ProblemSpec":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
        return cls.from_json(obj)

    def resolved(self) -> "ProblemSpec":
        """Validate and fill family defaults; returns a new spec."""
        if self.family.name not in FAMILY_NAMES:
            raise SpecError(f"unknown family {self.family.name!r}; choose from {list(FAMILY_NAMES)}")
        try:
            fam = make_family(self.family.name, self.family.params)
        except FPSolveError as exc:
            raise SpecError(str(exc)) from exc
        if not 0 <= self.level < fam.bound_state_count:
            raise SpecError(f"level {self.level} outside [0, {fam.bound_state_count})")
        g, r = self.grid, self.run
        if g.N < 100:
            raise SpecError("grid.N must be >= 100")
        if not 0 < g.eps < 1:
            raise SpecError("grid.eps must be in (0, 1)")
        if g.bounds is not None and not g.bounds[0] < g.bounds[1]:
            raise SpecError("grid.bounds must satisfy lo < hi")
        for name in ("dt", "T", "langevin_dt"):
            if not getattr(r, name) > 0:
                raise SpecError(f"run.{name} must be positive")
        if abs(round(r.T / r.dt) * r.dt - r.T) > 1e-9 * max(1.0, r.T):
            raise SpecError("run.T must be an integer multiple of run.dt")
        if not 0 <= r.seed < 2 ** 64:
            raise SpecError("run.seed must be a 64-bit unsigned integer")
        if r.chains < 1 or r.n_modes < 1 or r.bins < 1 or r.save_every < 1:
            raise SpecError("run.chains, run.n_modes, run.bins and run.save_every must be >= 1")
        if r.burn_in < 0 or r.steps <= r.burn_in:
            raise SpecError(f"run.steps ({r.steps}) must exceed run.burn_in ({r.burn_in})")
        for k, v in r.tolerances.items():
            if v < 0:
                raise SpecError(f"tolerance {k} must be non-negative")
        return ProblemSpec(FamilySpec(fam.name, dict(fam.params)), self.level, self.offset,
                           GridSpec(g.N, g.eps, None if g.bounds is None else list(g.bounds)),
                           RunSpec(**{**asdict(r), "tolerances": dict(r.tolerances)}))

    # -- output ------------------------------------------------------------

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def make_family(self):
        return make_family(self.family.name, self.family.params)

    def settings(self) -> Settings:
        g, r = self.grid, self.run
        return Settings(N=g.N, eps=g.eps, bounds=None if g.bounds is None else tuple(g.bounds),
                        dt=r.dt, T=r.T, seed=r.seed, chains=r.chains, steps=r.steps,
                        burn_in=r.burn_in, langevin_dt=r.langevin_dt, n_modes=r.n_modes,
                        bins=r.bins, tolerances=dict(r.tolerances))
