"""Operations layer: the corpus/run/sweep workflows behind both the CLI and
the service. Everything here is deterministic given (config, corpus); workers
only change wall-clock time.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from pathlib import Path
from typing import Sequence

from .config import ExperimentConfig
from .datagen import read_corpus, sample_population, write_corpus
from .evaluation import (
    ABLATION_KINDS,
    BASELINE_KINDS,
    metrics_report,
    paired_permutation_test,
    realized_costs,
    run_ablation,
    run_baseline,
    sensitivity_sweep,
)
from .orchestrator import run_population, write_traces


def generate_corpus(config: ExperimentConfig, out_path, seed: int | None = None) -> dict:
    """Sample and pin a population file; returns per-state counts."""
    problem = config.build_problem()
    use_seed = config.population.seed if seed is None else seed
    candidates = sample_population(config.population.n, problem, use_seed)
    write_corpus(out_path, candidates)
    counts = Counter(c.true_state for c in candidates)
    return {
        "path": str(out_path),
        "n": len(candidates),
        "seed": use_seed,
        "state_counts": {s: counts.get(s, 0) for s in problem.states},
    }


def run_method(
    method: str,
    candidates,
    config: ExperimentConfig,
    *,
    workers: int = 1,
):
    """Produce traces for one method name (framework, baseline, or ablation)."""
    problem = config.build_problem()
    providers = config.build_providers()
    source = config.build_source()
    if method == "framework":
        result = run_population(
            candidates, problem, providers, source, config.tau_d, parallelism=workers
        )
        if result.failures:
            raise RuntimeError(f"{len(result.failures)} episode failures: {result.failures[:3]}")
        return result.traces
    if method in BASELINE_KINDS:
        return run_baseline(method, {}, candidates, providers, problem)
    if method in ABLATION_KINDS:
        return run_ablation(
            method, candidates, providers, problem, source, config.tau_d, parallelism=workers
        )
    raise ValueError(f"unknown method: {method!r}")


def run_experiments(
    config: ExperimentConfig,
    corpus_path,
    out_dir,
    methods: Sequence[str] | None = None,
    workers: int | None = None,
) -> dict:
    """Run each requested method over a pinned corpus; write traces, metric
    reports, and a comparison table with permutation p-values against the
    framework. Per-method failures are isolated and reported."""
    corpus_path = Path(corpus_path)
    if not corpus_path.exists():
        raise FileNotFoundError(f"corpus not found: {corpus_path}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    candidates = read_corpus(corpus_path)
    problem = config.build_problem()
    methods = list(methods or config.methods)
    workers = workers if workers is not None else config.workers

    traces_by_method = {}
    reports = {}
    errors = {}
    for method in methods:
        try:
            traces = run_method(method, candidates, config, workers=workers)
            traces_by_method[method] = traces
            report = metrics_report(traces, problem, config.dispositions())
            reports[method] = report.to_dict()
            write_traces(out_dir / f"{method}.traces.jsonl", traces)
            (out_dir / f"{method}.metrics.json").write_text(
                json.dumps(report.to_dict(), indent=2, sort_keys=True)
            )
        except Exception as exc:  # noqa: BLE001 - isolate per-method failures
            errors[method] = f"{type(exc).__name__}: {exc}"

    comparisons = []
    if "framework" in traces_by_method:
        base_costs = realized_costs(traces_by_method["framework"], problem)
        for method, traces in traces_by_method.items():
            if method == "framework":
                continue
            other_costs = realized_costs(traces, problem)
            p = paired_permutation_test(base_costs, other_costs, seed=config.sweeps.seed)
            comparisons.append(
                {
                    "method": method,
                    "framework_cost": float(base_costs.sum()),
                    "method_cost": float(other_costs.sum()),
                    "delta": float(other_costs.sum() - base_costs.sum()),
                    "p_value": p,
                }
            )
    summary = {
        "methods": {m: reports[m] for m in reports},
        "comparisons": comparisons,
        "errors": errors,
    }
    (out_dir / "comparison.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    if comparisons:
        with (out_dir / "comparison.csv").open("w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["method", "framework_cost", "method_cost", "delta", "p_value"]
            )
            writer.writeheader()
            writer.writerows(comparisons)
    return summary


def run_sweep(
    config: ExperimentConfig,
    corpus_path,
    parameter: str,
    out_path,
    workers: int | None = None,
) -> list[dict]:
    corpus_path = Path(corpus_path)
    if not corpus_path.exists():
        raise FileNotFoundError(f"corpus not found: {corpus_path}")
    candidates = read_corpus(corpus_path)
    sweeps = config.sweeps
    rows = sensitivity_sweep(
        parameter,
        candidates,
        config.build_providers(),
        config.build_problem(),
        config.build_source(),
        config.tau_d,
        cost_scale_delta=sweeps.cost_scale_delta,
        cost_scale_draws=sweeps.cost_scale_draws,
        tau_d_grid=sweeps.tau_d_grid,
        rho_grid=sweeps.rho_grid,
        prior_draws=sweeps.prior_draws,
        prior_concentration=sweeps.prior_concentration,
        seed=sweeps.seed,
        parallelism=workers if workers is not None else config.workers,
    )
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["parameter", "setting", "total_cost", "flip_fraction"]
        )
        writer.writeheader()
        writer.writerows(rows)
    return rows
