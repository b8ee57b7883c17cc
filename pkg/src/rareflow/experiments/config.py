"""Scenario configuration: JSON schema, validation, and per-kind defaults.

A scenario is a pure function of (config, master seed).  The scaling
ladder is always stored as the strictly increasing rarefaction ladder:
for the memoryless-marking scenarios the marking rate is the reciprocal
of the ladder value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from ..distributions import DistributionSpec, exponential, spec_from_json, spec_to_json

__all__ = ["SCENARIO_KINDS", "ConfigError", "ScenarioConfig", "default_config"]

SCENARIO_KINDS = (
    "theorem1_geometric",
    "theorem2_poisson_example",
    "eq6_identity",
    "statement_bound_sweep",
    "mixing_zero_check",
    "gf_consistency",
)


class ConfigError(ValueError):
    """Invalid configuration, naming the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field_name = field_name


@dataclass
class ScenarioConfig:
    kind: str
    seed: int = 20260811
    replications: int = 1000
    ladder: tuple = ()
    probes: dict = field(default_factory=dict)
    specs: dict = field(default_factory=dict)
    grid_h: float = 1e-3
    grid_horizon: float = 12.0
    workers: int = 1
    out_dir: str | None = None
    max_seconds: float = 600.0
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.ladder = tuple(float(c) for c in self.ladder)
        self.probes = {k: tuple(v) for k, v in self.probes.items()}
        self.specs = {
            k: v if isinstance(v, DistributionSpec) else spec_from_json(v)
            for k, v in self.specs.items()
        }
        self.options = dict(self.options)
        self.validate()

    def validate(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError("kind", f"unknown scenario kind {self.kind!r}; "
                                      f"expected one of {', '.join(SCENARIO_KINDS)}")
        if self.replications < 1:
            raise ConfigError("replications", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.grid_h <= 0:
            raise ConfigError("grid_h", "must be positive")
        if self.grid_horizon < self.grid_h:
            raise ConfigError("grid_horizon", "must be at least one grid step")
        if self.max_seconds <= 0:
            raise ConfigError("max_seconds", "must be positive")
        if any(c <= 0 for c in self.ladder):
            raise ConfigError("ladder", "entries must be positive")
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ConfigError("ladder", "must be strictly increasing")

        need_ladder = self.kind in ("theorem1_geometric", "theorem2_poisson_example")
        if need_ladder and not self.ladder:
            raise ConfigError("ladder", f"{self.kind} requires a scaling ladder")
        if self.kind == "theorem1_geometric":
            self._need_probe("t")
        elif self.kind == "theorem2_poisson_example":
            self._need_spec("h")
            self._need_probe("k")
            if any(int(k) != k or k < 1 for k in self.probes["k"]):
                raise ConfigError("probes.k", "entries must be positive integers")
        elif self.kind == "eq6_identity":
            self._need_spec("h")
            self._need_spec("z")
            self._need_probe("l")
            self._need_probe("m")
        elif self.kind == "statement_bound_sweep":
            if self.options.get("n_configs", 100) < 1:
                raise ConfigError("options.n_configs", "must be >= 1")
        elif self.kind == "mixing_zero_check":
            self._need_spec("h")
            self._need_spec("z")
            lag = self.options.get("lag", 6)
            a_level = self.options.get("a_level", 3)
            if a_level >= lag:
                raise ConfigError(
                    "options.a_level",
                    "threshold level must stay below the lag (the exact-independence regime)",
                )
            if self.options.get("repetitions", 20) < 2:
                raise ConfigError("options.repetitions", "must be >= 2")
        elif self.kind == "gf_consistency":
            self._need_probe("s")
            self._need_probe("t")
            if any(not 0 < s <= 1 for s in self.probes["s"]):
                raise ConfigError("probes.s", "entries must lie in (0, 1]")
            if any(t < 0 or t > self.grid_horizon for t in self.probes["t"]):
                raise ConfigError("probes.t", "entries must lie within the grid horizon")

    def _need_probe(self, name: str) -> None:
        if not self.probes.get(name):
            raise ConfigError(f"probes.{name}", f"{self.kind} requires a nonempty probe grid")

    def _need_spec(self, name: str) -> None:
        if name not in self.specs:
            raise ConfigError(f"specs.{name}", f"{self.kind} requires this distribution spec")

    def to_json(self) -> dict:
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "specs":
                value = {k: spec_to_json(v) for k, v in value.items()}
            elif f.name in ("ladder",):
                value = list(value)
            elif f.name == "probes":
                value = {k: list(v) for k, v in value.items()}
            out[f.name] = value
        return out

    @classmethod
    def from_json(cls, obj: Mapping[str, Any] | str | Path) -> "ScenarioConfig":
        if isinstance(obj, (str, Path)):
            with open(obj) as fh:
                obj = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        if "kind" not in obj:
            raise ConfigError("kind", "required")
        return cls(**obj)


def default_config(kind: str, **overrides) -> ScenarioConfig:
    """Acceptance-grade configuration for each scenario kind."""
    if kind == "theorem1_geometric":
        base: dict[str, Any] = dict(
            kind=kind,
            replications=100_000,
            ladder=(10.0, 100.0, 1000.0),
            probes={"t": (2.0,)},
            options={"tolerance": 0.02},
        )
    elif kind == "theorem2_poisson_example":
        base = dict(
            kind=kind,
            replications=20_000,
            ladder=(10.0, 100.0, 1000.0),
            probes={"k": (1, 3)},
            specs={"h": exponential(1.0)},
            grid_h=1e-3,
            grid_horizon=14.0,
            options={"tolerances": {"1": 0.02, "3": 0.03}, "report_scalings": False},
        )
    elif kind == "eq6_identity":
        base = dict(
            kind=kind,
            replications=10_000,
            probes={"l": (0, 5, 20), "m": (1, 5, 10, 50)},
            specs={"h": exponential(1.0), "z": exponential(0.1)},
        )
    elif kind == "statement_bound_sweep":
        base = dict(
            kind=kind,
            replications=10_000,
            options={"n_configs": 100},
        )
    elif kind == "mixing_zero_check":
        base = dict(
            kind=kind,
            replications=1_500,
            specs={"h": exponential(1.0), "z": exponential(0.1)},
            options={"site": 0, "lag": 6, "a_level": 3, "b_level": 5,
                     "repetitions": 20, "min_passes": 19},
        )
    elif kind == "gf_consistency":
        base = dict(
            kind=kind,
            replications=1,
            probes={"s": (0.2, 0.5, 0.8), "t": (1.0, 2.0, 5.0)},
            grid_h=1e-3,
            grid_horizon=5.0,
            options={"k_max": 30, "include_closed_form": True, "closed_form_tol": 1e-3},
        )
    else:
        raise ConfigError("kind", f"unknown scenario kind {kind!r}")
    base.update(overrides)
    return ScenarioConfig(**base)
