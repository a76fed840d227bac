"""Experiment configuration documents (JSON)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from ..ensembles import EnsembleSpec, ensemble_from_dict
from ..errors import ConfigError, DerivZerosError
from ..rootfind import AberthConfig

CONFIG_SCHEMA = "derivzeros-config/1"
DEFAULT_PROBE_Z = (2 + 0j, 1 + 1j, 0.3 - 0.7j, -1.5 + 0j)


@dataclass(frozen=True)
class DistanceConfig:
    # W1(M(P^(k)), M(P)): exact network simplex up to parent_max_points
    parent_method: str = "exact"
    parent_max_points: int = 1100
    # W1(M(P^(k)), target cloud)
    target: bool = True
    target_method: str = "subsample"
    target_pairs: int = 4
    target_size: int = 512
    target_eps: float = 0.05
    n_ref: int = 4096

    def __post_init__(self):
        for m in (self.parent_method, self.target_method):
            if m not in ("exact", "subsample", "entropic"):
                raise ConfigError(f"unknown distance method {m!r}")
        if self.n_ref < 1 or self.target_pairs < 1 or self.target_size < 1:
            raise ConfigError("n_ref, target_pairs and target_size must be positive")


@dataclass(frozen=True)
class ProbeConfig:
    z_points: tuple = DEFAULT_PROBE_Z
    extra_random_z: int = 4            # seeded uniform draws from the disk of radius 2
    eps: float = 0.1
    r: float = 2.0
    mc_points: int = 4096

    def __post_init__(self):
        if not self.r > 0:
            raise ConfigError("probe disk radius must be positive")
        if self.mc_points < 2 or self.extra_random_z < 0:
            raise ConfigError("mc_points >= 2 and extra_random_z >= 0 required")


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: dict
    k_list: tuple
    n_grid: tuple
    trials: int = 20
    master_seed: int = 0
    distance: DistanceConfig = DistanceConfig()
    aberth: AberthConfig = AberthConfig()
    probe: ProbeConfig = ProbeConfig()
    threads: int = 1
    name: str = "experiment"

    def __post_init__(self):
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.k_list:
            raise ConfigError("k_list must not be empty")
        if not self.n_grid:
            raise ConfigError("n_grid must not be empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if min(self.k_list) < 1:
            raise ConfigError("derivative orders must be >= 1")
        if max(self.k_list) >= min(self.n_grid):
            raise ConfigError("need max(k_list) < min(n_grid)")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        try:
            self.spec(self.n_grid[0])
        except DerivZerosError as exc:
            raise ConfigError(f"bad ensemble: {exc}") from None

    def spec(self, n: int) -> EnsembleSpec:
        return ensemble_from_dict(self.ensemble, n=n)

    def with_(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        """Echo for reports; ``threads`` is left out since it cannot change results."""
        probe = asdict(self.probe)
        probe["z_points"] = [[complex(z).real, complex(z).imag] for z in self.probe.z_points]
        return {
            "schema_version": CONFIG_SCHEMA,
            "name": self.name,
            "ensemble": self.ensemble,
            "k_list": list(self.k_list),
            "n_grid": list(self.n_grid),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "distance": asdict(self.distance),
            "aberth": asdict(self.aberth),
            "probe": probe,
        }


def _sub(cls, d, what):
    if d is None:
        return cls()
    if not isinstance(d, dict):
        raise ConfigError(f"{what} must be an object")
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {what}: {exc}") from None


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    d = dict(d)
    version = d.pop("schema_version", CONFIG_SCHEMA)
    if version != CONFIG_SCHEMA:
        raise ConfigError(f"unsupported schema_version {version!r}")
    if "ensemble" not in d:
        raise ConfigError("config needs an 'ensemble' section")
    probe = d.pop("probe", None)
    if probe is not None and "z_points" in probe:
        probe = dict(probe)
        probe["z_points"] = tuple(complex(*z) if isinstance(z, (list, tuple)) else complex(z)
                                  for z in probe["z_points"])
    try:
        return ExperimentConfig(
            distance=_sub(DistanceConfig, d.pop("distance", None), "distance"),
            aberth=_sub(AberthConfig, d.pop("aberth", None), "aberth"),
            probe=_sub(ProbeConfig, probe, "probe"),
            **d,
        )
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from None


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        return config_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
