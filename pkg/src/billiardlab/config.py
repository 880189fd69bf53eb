"""Experiment configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional, Union

import numpy as np

from .geometry import Rhombus, RightTriangle, Tolerances, triangle_to_rhombus

SEEDED = "seeded-random"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    shape: str = "triangle"  # "triangle" (acute angle) or "rhombus" (angle at vertex 0)
    angle: Union[float, str] = SEEDED
    seed: Optional[int] = 1
    n_max: int = 12
    n_min: int = 1
    apex: int = 0
    oriented: bool = False
    mu_grid: List[float] = field(default_factory=lambda: [2.0 ** -k for k in range(3, 11)])
    alpha: Union[float, str] = SEEDED
    n_alphas: int = 20
    alpha_bits: int = 256
    hitting_cap: int = 10 ** 6
    gamma: float = 0.1
    c: float = 2.0
    C: Optional[float] = None
    epsilon: float = 0.1
    vertex_rel: float = 1e-9
    line_rel: float = 1e-12
    node_budget: int = 10 ** 7
    pair: int = 0
    beam_mu: float = 0.01
    max_steps: int = 10 ** 5
    drag_step: float = 1e-3
    max_drags: int = 10 ** 4
    drag_target: str = "apex"
    output_dir: str = "out"

    def validate(self) -> "ExperimentConfig":
        if self.shape not in ("triangle", "rhombus"):
            raise ConfigError("shape must be 'triangle' or 'rhombus'")
        for name in ("angle", "alpha"):
            v = getattr(self, name)
            if isinstance(v, str):
                if v != SEEDED:
                    raise ConfigError(f"{name} must be a number or '{SEEDED}'")
                if self.seed is None:
                    raise ConfigError(f"{name} is '{SEEDED}' but no seed was given")
        if isinstance(self.angle, (int, float)):
            upper = math.pi / 2 if self.shape == "triangle" else math.pi
            if not 0 < self.angle < upper:
                raise ConfigError(f"angle must lie in (0, {upper:.6g})")
        if isinstance(self.alpha, (int, float)) and not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.vertex_rel <= 0 or self.line_rel <= 0:
            raise ConfigError("tolerances must be positive")
        if self.n_max < 0 or self.n_min < 0 or self.n_min > self.n_max:
            raise ConfigError("need 0 <= n_min <= n_max")
        if self.c <= 0 or self.gamma <= 0 or self.epsilon <= 0:
            raise ConfigError("gamma, c and epsilon must be positive")
        if not all(0 < m < 0.5 for m in self.mu_grid):
            raise ConfigError("every mu must lie in (0, 0.5)")
        if self.drag_target not in ("apex", "left", "right"):
            raise ConfigError("drag_target must be apex, left or right")
        if self.node_budget < 1 or self.max_steps < 1 or self.max_drags < 1:
            raise ConfigError("budgets must be positive")
        return self

    @property
    def tol(self) -> Tolerances:
        return Tolerances(self.vertex_rel, self.line_rel)

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed if self.seed is not None else 0, stream])

    def resolved_angle(self) -> float:
        if isinstance(self.angle, str):
            # a seeded sample stands in for a typical angle; no typicality is claimed
            return float(self.rng(0).uniform(0.0, math.pi / 2))
        return float(self.angle)

    def table(self):
        """The billiard table named by ``shape`` and ``angle``."""
        a = self.resolved_angle()
        if self.shape == "triangle":
            return RightTriangle(a)
        if isinstance(self.angle, str):
            return triangle_to_rhombus(RightTriangle(a))
        return Rhombus.from_angle(a)

    def rhombus(self) -> Rhombus:
        t = self.table()
        return triangle_to_rhombus(t) if isinstance(t, RightTriangle) else t

    def echo(self) -> dict:
        d = asdict(self)
        d["resolved_angle"] = self.resolved_angle()
        return d


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    data = {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    names = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    return ExperimentConfig(**data).validate()
