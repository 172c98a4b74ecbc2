"""Experiment configuration and its YAML file format.

A config file mirrors :class:`ExperimentConfig`: one mapping per section,
keys named exactly like the dataclass fields.  Omitted keys keep their
defaults.  Example::

    dataset:
      kind: synthetic      # or csv (then set path)
      n: 100
      k: 10
    init:
      kind: zero           # or kmeans
    strategy:
      name: coverage-cost-hard
      switch_iter: 20
    run:
      batch_size: 50
      budget: 4950
      seed: 0
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .coverage import STRATEGY_IDS, StrategyConfig
from .meanfield import MeanFieldParams
from .solver import SolverParams


class ConfigError(ValueError):
    pass


@dataclass
class DatasetSpec:
    kind: str = "synthetic"
    n: int = 100
    k: int = 10
    dim: int = 16
    spread: float = 1.0
    path: str | None = None
    # synthetic data seed; None reuses the run seed
    seed: int | None = 0


@dataclass
class InitSpec:
    kind: str = "zero"
    scale: float = 0.01
    k: int | None = None
    reveal_fraction: float = 0.0
    reveal_mark_queried: bool = True


@dataclass
class StrategySpec:
    name: str = "coverage-cost-hard"
    switch_iter: float = 20
    epsilon: float = 1e-9
    tie_break: str = "random"

    def __post_init__(self):
        # YAML reads "1e12" and "inf" as strings
        try:
            self.switch_iter = float(self.switch_iter)
        except (TypeError, ValueError):
            raise ConfigError(f"strategy.switch_iter must be a number, got {self.switch_iter!r}") from None

    def build(self) -> StrategyConfig:
        return StrategyConfig.from_name(
            self.name, switch_iter=self.switch_iter, epsilon=self.epsilon, tie_break=self.tie_break
        )


@dataclass
class OracleSpec:
    gamma: float = 0.4


@dataclass
class SolverSpec:
    max_sweeps: int = 200
    restarts: int = 0


@dataclass
class MeanFieldSpec:
    beta: float = 1.0
    max_iters: int = 100
    tol: float = 1e-6
    damping: float = 0.5
    warm_start: bool = False


@dataclass
class RunSpec:
    batch_size: int = 50
    # None means every pair
    budget: int | None = None
    seed: int = 0
    repetitions: int = 1
    output_dir: str = "results"


@dataclass
class ExperimentConfig:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    init: InitSpec = field(default_factory=InitSpec)
    strategy: StrategySpec = field(default_factory=StrategySpec)
    oracle: OracleSpec = field(default_factory=OracleSpec)
    solver: SolverSpec = field(default_factory=SolverSpec)
    meanfield: MeanFieldSpec = field(default_factory=MeanFieldSpec)
    run: RunSpec = field(default_factory=RunSpec)

    def validate(self, n: int | None = None) -> None:
        """Raise :class:`ConfigError` on inconsistent settings.

        ``n`` is the object count once the dataset is known; the batch/budget
        bounds are only checked against it then.
        """
        d = self.dataset
        if d.kind not in ("synthetic", "csv"):
            raise ConfigError(f"dataset.kind must be synthetic or csv, got {d.kind!r}")
        if d.kind == "csv" and not d.path:
            raise ConfigError("dataset.path is required for csv datasets")
        if d.kind == "synthetic" and not 1 <= d.k <= d.n:
            raise ConfigError("synthetic dataset needs 1 <= k <= n")
        if self.init.kind not in ("zero", "kmeans"):
            raise ConfigError(f"init.kind must be zero or kmeans, got {self.init.kind!r}")
        if not 0.0 <= self.init.reveal_fraction <= 1.0:
            raise ConfigError("init.reveal_fraction must lie in [0, 1]")
        if self.strategy.name not in STRATEGY_IDS:
            raise ConfigError(f"unknown strategy {self.strategy.name!r}")
        if not 0.0 <= self.oracle.gamma <= 1.0:
            raise ConfigError("oracle.gamma must lie in [0, 1]")
        if self.run.repetitions < 1:
            raise ConfigError("run.repetitions must be >= 1")
        if self.run.batch_size < 1:
            raise ConfigError("run.batch_size must be >= 1")
        try:
            self.strategy.build()
            self.solver_params(0)
            MeanFieldParams(k=2, beta=self.meanfield.beta, max_iters=self.meanfield.max_iters,
                            tol=self.meanfield.tol, damping=self.meanfield.damping)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if n is not None:
            n_pairs = n * (n - 1) // 2
            budget = self.budget_for(n)
            if not 1 <= self.run.batch_size <= budget <= n_pairs:
                raise ConfigError(
                    f"need 1 <= batch_size ({self.run.batch_size}) <= budget ({budget}) "
                    f"<= number of pairs ({n_pairs})"
                )

    def budget_for(self, n: int) -> int:
        n_pairs = n * (n - 1) // 2
        return n_pairs if self.run.budget is None else int(self.run.budget)

    def solver_params(self, seed: int) -> SolverParams:
        return SolverParams(max_sweeps=self.solver.max_sweeps, restarts=self.solver.restarts, rng_seed=seed)

    def meanfield_params(self, k: int, seed: int) -> MeanFieldParams:
        mf = self.meanfield
        return MeanFieldParams(k=k, beta=mf.beta, max_iters=mf.max_iters, tol=mf.tol,
                               damping=mf.damping, rng_seed=seed)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **sections) -> "ExperimentConfig":
        """Copy with per-section overrides, e.g. ``replace(run={"seed": 3})``."""
        out = from_dict(self.to_dict())
        for name, values in sections.items():
            section = getattr(out, name)
            for key, value in values.items():
                if not hasattr(section, key):
                    raise ConfigError(f"unknown key {name}.{key}")
                setattr(section, key, value)
        return out


_SECTIONS = {f.name: f.default_factory for f in dataclasses.fields(ExperimentConfig)}


def from_dict(raw: dict | None) -> ExperimentConfig:
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of sections")
    sections = {}
    for name, values in raw.items():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown config section {name!r}")
        values = values or {}
        if not isinstance(values, dict):
            raise ConfigError(f"section {name!r} must be a mapping")
        cls = type(_SECTIONS[name]())
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown key(s) in {name}: {', '.join(sorted(unknown))}")
        sections[name] = cls(**values)
    return ExperimentConfig(**sections)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    cfg = from_dict(raw)
    cfg.validate()
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)
