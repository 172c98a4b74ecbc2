"""The active correlation-clustering loop, repetitions and result files.

Each round clusters the current similarity estimate (warm-started from the
previous round), fits the mean-field posterior when the strategy needs it,
selects a batch, and writes the oracle's answers back into the estimate.

Output files
------------
``<name>.jsonl``
    One JSON object per round, keys in this order::

        {"iter": 0, "queries": 0, "ari": 0.0, "k": 100, "mc_cost": -0.0, "batch": [[0, 5], ...]}

    ``queries`` counts answers received before the round's batch, ``ari`` and
    ``k`` describe the clustering computed at the start of the round, and
    ``batch`` lists the pairs queried in that round.  The final line is the
    clustering after the last update and has an empty batch.  Separators are
    ``", "`` and ``": "``; floats use Python's shortest round-trip repr; lines
    end with ``\\n``.

``summary.csv``
    Header ``iter,queries,ari_mean,ari_median,ari_std`` followed by one row per
    round level across seeds, floats written with ``repr``.  ``ari_std`` is
    the population standard deviation.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .coverage import entropy_k, select_batch
from .data import (
    Dataset,
    NoisyOracle,
    OracleConfig,
    init_similarity,
    load_feature_csv,
    reveal_pairs,
    synthetic_dataset,
)
from .meanfield import mean_field
from .metrics import adjusted_rand_index
from .model import Clustering, mc_cost
from .solver import local_search_cc

log = logging.getLogger(__name__)

# independent random streams derived from (seed, stream, round)
_DATA, _INIT, _ORACLE, _REVEAL = 0, 1, 2, 3
_SOLVER, _MEANFIELD, _STRATEGY = 10, 11, 12


class RunError(RuntimeError):
    pass


def derive_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([seed, *key])


@dataclass
class RoundRecord:
    iter: int
    queries: int
    ari: float
    k: int
    mc_cost: float
    batch: list[tuple[int, int]] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "iter": self.iter,
                "queries": self.queries,
                "ari": self.ari,
                "k": self.k,
                "mc_cost": self.mc_cost,
                "batch": [list(p) for p in self.batch],
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "RoundRecord":
        d = json.loads(line)
        d["batch"] = [tuple(p) for p in d["batch"]]
        return cls(**d)


def load_dataset(cfg: ExperimentConfig, seed: int) -> Dataset:
    d = cfg.dataset
    if d.kind == "csv":
        return load_feature_csv(d.path)
    data_seed = seed if d.seed is None else d.seed
    return synthetic_dataset(d.n, d.k, d.dim, d.spread, rng=stream(data_seed, _DATA))


def preflight(cfg: ExperimentConfig, seed: int, dataset: Dataset | None = None) -> Dataset:
    """Load the dataset and check the config against it before any round runs."""
    if dataset is None:
        dataset = load_dataset(cfg, seed)
    cfg.validate(dataset.n)
    if cfg.init.kind == "kmeans" and dataset.features is None:
        raise ConfigError("kmeans initialisation needs a dataset with features")
    return dataset


def run_active_cc(
    cfg: ExperimentConfig,
    seed: int | None = None,
    dataset: Dataset | None = None,
) -> list[RoundRecord]:
    """Run one active-clustering experiment and return its per-round log."""
    seed = cfg.run.seed if seed is None else seed
    dataset = preflight(cfg, seed, dataset)

    truth = dataset.truth()
    strategy = cfg.strategy.build()
    budget = cfg.budget_for(dataset.n)
    batch_size = cfg.run.batch_size

    s = init_similarity(cfg.init.kind, dataset, cfg.init.k, cfg.init.scale, rng=stream(seed, _INIT))
    if cfg.init.reveal_fraction > 0:
        reveal_pairs(s, dataset.labels, cfg.init.reveal_fraction, stream(seed, _REVEAL),
                     mark_queried=cfg.init.reveal_mark_queried)
    oracle = NoisyOracle(dataset.labels, OracleConfig(gamma=cfg.oracle.gamma), rng=stream(seed, _ORACLE))

    records: list[RoundRecord] = []
    c = Clustering.singletons(dataset.n)
    prev_q = None
    i, q = 0, 0
    while True:
        try:
            c = local_search_cc(s, init=c, params=cfg.solver_params(derive_seed(seed, _SOLVER, i)))
        except Exception as exc:
            raise RunError(f"solver failed in round {i}: {exc}") from exc
        ari = adjusted_rand_index(c, truth)
        cost = mc_cost(c, s)
        if q >= budget or not s.unqueried_pairs()[0].size:
            records.append(RoundRecord(i, q, ari, c.k, cost, []))
            break

        posterior_q = None
        if strategy.needs_posterior(i):
            k = entropy_k(c)
            init_q = prev_q if cfg.meanfield.warm_start and prev_q is not None and prev_q.shape[1] == k else None
            posterior = mean_field(s, cfg.meanfield_params(k, derive_seed(seed, _MEANFIELD, i)), init_q=init_q)
            posterior_q = prev_q = posterior.q

        want = min(batch_size, budget - q)
        batch = select_batch(strategy, i, s, c, posterior_q, want, stream(seed, _STRATEGY, i))
        for u, v in batch:
            try:
                s.record(u, v, oracle.query(u, v))
            except Exception as exc:
                raise RunError(f"oracle update failed in round {i}, pair ({u}, {v}): {exc}") from exc
        records.append(RoundRecord(i, q, ari, c.k, cost, batch))
        log.debug("round %d: queries=%d ari=%.4f k=%d", i, q, ari, c.k)
        q += len(batch)
        i += 1
    return records


def queries_to_reach(records: list[RoundRecord], threshold: float) -> int | None:
    """Cumulative queries at the first round whose ARI reaches ``threshold``."""
    for r in records:
        if r.ari >= threshold:
            return r.queries
    return None


def write_records(records: list[RoundRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_records(path: str | Path) -> list[RoundRecord]:
    with Path(path).open(encoding="utf-8") as fh:
        return [RoundRecord.from_json(line) for line in fh if line.strip()]


@dataclass
class RepetitionResult:
    runs: dict[int, list[RoundRecord]]
    failures: dict[int, str]
    summary: list[dict]


def aggregate(runs: list[list[RoundRecord]]) -> list[dict]:
    """Mean, median and std of ARI per round level over the given runs."""
    levels: dict[int, list[RoundRecord]] = {}
    for records in runs:
        for r in records:
            levels.setdefault(r.iter, []).append(r)
    rows = []
    for it in sorted(levels):
        aris = np.array([r.ari for r in levels[it]])
        rows.append(
            {
                "iter": it,
                "queries": levels[it][0].queries,
                "ari_mean": float(aris.mean()),
                "ari_median": float(np.median(aris)),
                "ari_std": float(aris.std()),
            }
        )
    return rows


def _run_seed(args):
    cfg, seed = args
    try:
        return seed, run_active_cc(cfg, seed), None
    except Exception as exc:  # reported per seed, the others still count
        return seed, None, f"{type(exc).__name__}: {exc}"


def run_repetitions(cfg: ExperimentConfig, seeds: list[int], n_jobs: int = 1) -> RepetitionResult:
    if not seeds:
        raise ValueError("need at least one seed")
    jobs = [(cfg, s) for s in seeds]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_seed, jobs))
    else:
        results = [_run_seed(j) for j in jobs]
    runs, failures, ordered = {}, {}, []
    for seed, records, err in results:
        if err is not None:
            log.error("seed %d failed: %s", seed, err)
            failures[seed] = err
        else:
            runs[seed] = records
            ordered.append(records)
    return RepetitionResult(runs=runs, failures=failures, summary=aggregate(ordered))


SUMMARY_HEADER = "iter,queries,ari_mean,ari_median,ari_std"


def write_summary(rows: list[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [SUMMARY_HEADER]
    for row in rows:
        lines.append(
            f"{row['iter']},{row['queries']},{row['ari_mean']!r},{row['ari_median']!r},{row['ari_std']!r}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_repetitions(result: RepetitionResult, out_dir: str | Path, prefix: str = "seed") -> None:
    out_dir = Path(out_dir)
    for seed, records in result.runs.items():
        write_records(records, out_dir / f"{prefix}{seed}.jsonl")
    write_summary(result.summary, out_dir / "summary.csv")
    if result.failures:
        (out_dir / "failures.json").write_text(json.dumps(result.failures, indent=2, sort_keys=True) + "\n")
