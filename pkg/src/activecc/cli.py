"""Command line entry point.

    activecc run --config exp.yaml [--seed 7]
    activecc sweep --config exp.yaml --strategies coverage-cost-hard,entropy --seeds 10
    activecc ablate switch-point|warm-start|soft-vs-hard --config exp.yaml

Exit codes: 0 success, 1 configuration or input error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, dump_config, load_config
from .coverage import STRATEGY_IDS, parse_strategy_list
from .data import DataLoadError
from .harness import (
    RepetitionResult,
    RunError,
    preflight,
    queries_to_reach,
    run_repetitions,
    write_repetitions,
)

log = logging.getLogger("activecc")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

ABLATIONS = ("switch-point", "warm-start", "soft-vs-hard")
DEFAULT_SWITCH_POINTS = "5,10,20,40,inf"
DEFAULT_REVEAL_FRACTIONS = "0,0.01,0.05,0.1"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad arguments count as configuration errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--seed", type=int, default=None, help="override run.seed")
    p.add_argument("--output-dir", default=None, help="override run.output_dir")
    p.add_argument("--gamma", type=float, default=None, help="override oracle.gamma")
    p.add_argument("--batch-size", type=int, default=None, help="override run.batch_size")
    p.add_argument("--budget", type=int, default=None, help="override run.budget")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for repetitions")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="activecc", description="Active correlation clustering benchmark.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="single experiment (run.repetitions seeds from --seed)")
    _add_common(p)

    p = sub.add_parser("sweep", help="compare strategies over several seeds")
    _add_common(p)
    p.add_argument("--strategies", required=True,
                   help="comma list from: " + ", ".join(STRATEGY_IDS))
    p.add_argument("--seeds", type=int, default=None, help="number of seeds (default run.repetitions)")

    p = sub.add_parser("ablate", help="scripted ablations")
    p.add_argument("ablation", choices=ABLATIONS)
    _add_common(p)
    p.add_argument("--seeds", type=int, default=None, help="number of seeds (default run.repetitions)")
    p.add_argument("--values", default=None,
                   help="comma list of switch points or reveal fractions for the first two ablations")
    p.add_argument("--warmstart-mark-queried", action=argparse.BooleanOptionalAction, default=None,
                   help="mark revealed pairs as queried (default from init.reveal_mark_queried)")
    return parser


def apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    run = {}
    if args.seed is not None:
        run["seed"] = args.seed
    if args.output_dir is not None:
        run["output_dir"] = args.output_dir
    if args.batch_size is not None:
        run["batch_size"] = args.batch_size
    if args.budget is not None:
        run["budget"] = args.budget
    sections = {"run": run}
    if args.gamma is not None:
        sections["oracle"] = {"gamma": args.gamma}
    cfg = cfg.replace(**sections)
    cfg.validate()
    return cfg


def _seed_list(cfg: ExperimentConfig, count: int | None) -> list[int]:
    count = cfg.run.repetitions if count is None else count
    if count < 1:
        raise ConfigError("--seeds must be >= 1")
    return list(range(cfg.run.seed, cfg.run.seed + count))


def _curve_stats(result: RepetitionResult) -> dict:
    """Per-variant numbers reported in sweep and ablation tables."""
    runs = list(result.runs.values())

    def median_reach(threshold):
        hits = [queries_to_reach(r, threshold) for r in runs]
        hits = [np.inf if h is None else h for h in hits]
        return float(np.median(hits)) if hits else float("nan")

    finals = [r[-1].ari for r in runs]
    return {
        "runs": len(runs),
        "failed": len(result.failures),
        "median_queries_ari95": median_reach(0.95),
        "median_queries_ari100": median_reach(1.0),
        "final_ari_mean": float(np.mean(finals)) if finals else float("nan"),
    }


def _execute(cfg: ExperimentConfig, seeds: list[int], out_dir: Path, jobs: int) -> RepetitionResult:
    # surface config and input errors before spending time on any seed
    preflight(cfg, seeds[0])
    result = run_repetitions(cfg, seeds, n_jobs=jobs)
    write_repetitions(result, out_dir)
    (out_dir / "config.yaml").write_text(dump_config(cfg), encoding="utf-8")
    return result


def _write_table(rows: list[dict], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _print_table(rows: list[dict]) -> None:
    keys = list(rows[0])
    print("  ".join(keys))
    for row in rows:
        print("  ".join(f"{row[k]:.4g}" if isinstance(row[k], float) else str(row[k]) for k in keys))


def cmd_run(cfg: ExperimentConfig, args) -> RepetitionResult:
    out = Path(cfg.run.output_dir)
    seeds = _seed_list(cfg, None)
    result = _execute(cfg, seeds, out, args.jobs)
    for seed, records in result.runs.items():
        last = records[-1]
        print(f"seed {seed}: rounds={last.iter} queries={last.queries} final_ari={last.ari:.4f} k={last.k}")
    return result


def cmd_sweep(cfg: ExperimentConfig, args) -> list[RepetitionResult]:
    try:
        names = parse_strategy_list(args.strategies)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not names:
        raise ConfigError("--strategies is empty")
    seeds = _seed_list(cfg, args.seeds)
    out = Path(cfg.run.output_dir)
    rows, results = [], []
    for name in names:
        variant = cfg.replace(strategy={"name": name})
        result = _execute(variant, seeds, out / name, args.jobs)
        results.append(result)
        rows.append({"strategy": name, **_curve_stats(result)})
    _write_table(rows, out / "sweep.csv")
    _print_table(rows)
    return results


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list: {exc}") from None


def _ablation_variants(cfg: ExperimentConfig, args) -> list[tuple[str, ExperimentConfig]]:
    if args.ablation == "switch-point":
        points = _parse_floats(args.values or DEFAULT_SWITCH_POINTS)
        return [(f"switch-{p:g}", cfg.replace(strategy={"switch_iter": p})) for p in points]
    if args.ablation == "warm-start":
        mark = cfg.init.reveal_mark_queried if args.warmstart_mark_queried is None else args.warmstart_mark_queried
        fractions = _parse_floats(args.values or DEFAULT_REVEAL_FRACTIONS)
        return [
            (f"reveal-{f:g}", cfg.replace(init={"reveal_fraction": f, "reveal_mark_queried": mark}))
            for f in fractions
        ]
    # soft vs hard memberships under both initialisations
    name = cfg.strategy.name
    a_kind = name.split("-")[1] if name.startswith("coverage-") else "cost"
    variants = []
    for init in ("zero", "kmeans"):
        for mode in ("soft", "hard"):
            strategy = f"coverage-{a_kind}-{mode}"
            variants.append((f"{init}-{strategy}", cfg.replace(init={"kind": init}, strategy={"name": strategy})))
    return variants


def cmd_ablate(cfg: ExperimentConfig, args) -> list[RepetitionResult]:
    seeds = _seed_list(cfg, args.seeds)
    out = Path(cfg.run.output_dir) / args.ablation
    rows, results = [], []
    for label, variant in _ablation_variants(cfg, args):
        variant.validate()
        result = _execute(variant, seeds, out / label, args.jobs)
        results.append(result)
        rows.append({"variant": label, **_curve_stats(result)})
    _write_table(rows, out / "ablation.csv")
    _print_table(rows)
    return results


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "ablate": cmd_ablate}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = apply_overrides(load_config(args.config), args)
        outcome = COMMANDS[args.command](cfg, args)
    except (ConfigError, DataLoadError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RunError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    results = outcome if isinstance(outcome, list) else [outcome]
    failed = {seed: err for r in results for seed, err in r.failures.items()}
    if failed:
        for seed, err in sorted(failed.items()):
            print(f"seed {seed} failed: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
