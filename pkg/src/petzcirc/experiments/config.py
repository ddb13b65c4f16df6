"""Experiment configuration, loadable from JSON and overridable from the CLI."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ConfigError
from .pipelines import INJECTIONS

RECOVERY_METHODS = ("iso", "povm", "blockenc")
FORMATS = ("csv", "json", "svg")


def parse_sweep(spec: Any) -> list[float]:
    """A sweep from a number, a list, ``"a,b,c"``, ``"start:stop:num"`` or ``{start, stop, num}``."""
    if isinstance(spec, (int, float)):
        return [float(spec)]
    if isinstance(spec, dict):
        try:
            return list(np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad sweep {spec!r}: {exc}") from None
    if isinstance(spec, str):
        try:
            if ":" in spec:
                start, stop, num = spec.split(":")
                return list(np.linspace(float(start), float(stop), int(num)))
            return [float(x) for x in spec.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse sweep {spec!r}") from None
    if isinstance(spec, (list, tuple)):
        try:
            return [float(x) for x in spec]
        except (TypeError, ValueError):
            raise ConfigError(f"sweep entries must be numbers, got {spec!r}") from None
    raise ConfigError(f"cannot interpret sweep {spec!r}")


@dataclass
class ExperimentConfig:
    methods: list[str] = field(default_factory=lambda: list(RECOVERY_METHODS))
    code: str = "leung4"
    gamma: list[float] = field(default_factory=lambda: [0.2])
    theta_points: int = 33
    phi: float = 0.0
    noise_injection: str = "circuit"
    mu_1q: float = 0.0
    mu_2q: float = 0.0
    shots: int | None = None
    seed: int = 0
    t1: float = 100e-6
    prep: str = "exact"
    threshold_mode: str = "worst"
    threshold_theta_points: int = 17
    mu_map: dict[str, float] = field(default_factory=lambda: {"povm": 1e-6, "iso": 1e-5})
    output: str | None = None
    format: str = "csv"

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if isinstance(self.methods, str):
            self.methods = [m.strip() for m in self.methods.split(",") if m.strip()]
        for m in self.methods:
            if m not in RECOVERY_METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {RECOVERY_METHODS}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        self.gamma = parse_sweep(self.gamma)
        if not self.gamma:
            raise ConfigError("gamma sweep is empty")
        for g in self.gamma:
            if not 0 <= g <= 1:
                raise ConfigError(f"gamma={g} outside [0, 1]")
        if self.theta_points < 1 or self.threshold_theta_points < 1:
            raise ConfigError("theta grids need at least one point")
        if self.noise_injection not in INJECTIONS:
            raise ConfigError(f"noise_injection must be one of {INJECTIONS}")
        for name in ("mu_1q", "mu_2q"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} outside [0, 1]")
        for k, v in self.mu_map.items():
            if k not in RECOVERY_METHODS or not 0 <= v <= 1:
                raise ConfigError(f"bad mu_map entry {k}: {v}")
        if self.shots is not None and self.shots <= 0:
            raise ConfigError("shots must be positive (omit for exact probabilities)")
        if self.t1 <= 0:
            raise ConfigError("t1 must be positive")
        if self.prep not in ("exact", "hardware"):
            raise ConfigError("prep must be 'exact' or 'hardware'")
        if self.threshold_mode not in ("worst", "ket1"):
            raise ConfigError("threshold_mode must be 'worst' or 'ket1'")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "method" in data:
            raise ConfigError("use 'methods' (a list) in config files")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes: Any) -> "ExperimentConfig":
        data = self.to_dict()
        data.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig(**data)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)
