"""Command-line front end: corpus generation, experiment runs, sensitivity
sweeps, and launching the decision service. Subcommands are thin wrappers over
the operations layer.
"""

from __future__ import annotations

import sys
import click

from .config import default_config, load_config
from .errors import ConfigError
from .evaluation import SWEEP_PARAMETERS


def _load(config_path):
    if config_path is None:
        return default_config()
    return load_config(config_path)


@click.group()
def main():
    """Cost-aware screening decisions from an ensemble of generative scorers."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="YAML config; defaults to the built-in hiring setup.")
@click.option("--out", "out_path", type=click.Path(), default="corpus.jsonl", show_default=True)
@click.option("--seed", type=int, default=None, help="Override the population seed.")
def generate(config_path, out_path, seed):
    """Sample a candidate corpus and pin it to a file."""
    from . import ops

    try:
        config = _load(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    summary = ops.generate_corpus(config, out_path, seed=seed)
    click.echo(f"wrote {summary['n']} candidates to {summary['path']} (seed {summary['seed']})")
    for state, count in summary["state_counts"].items():
        click.echo(f"  {state}: {count}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--corpus", "corpus_path", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), default="out", show_default=True)
@click.option("--methods", default=None, help="Comma-separated method names; defaults to the config's list.")
@click.option("--workers", type=int, default=None, help="Worker threads for episode batches.")
def run(config_path, corpus_path, out_dir, methods, workers):
    """Run the framework and/or baselines and ablations over a pinned corpus."""
    from . import ops

    try:
        config = _load(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    method_list = [m.strip() for m in methods.split(",")] if methods else None
    try:
        summary = ops.run_experiments(config, corpus_path, out_dir, method_list, workers)
    except FileNotFoundError as exc:
        raise click.ClickException(str(exc))
    for method, report in summary["methods"].items():
        click.echo(
            f"{method}: total_cost={report['total_cost']:.0f} "
            f"accuracy={report['accuracy']:.3f} screens={report['screens']}"
        )
    for row in summary["comparisons"]:
        click.echo(
            f"framework vs {row['method']}: delta={row['delta']:+.0f} p={row['p_value']:.4g}"
        )
    if summary["errors"]:
        for method, err in summary["errors"].items():
            click.echo(f"FAILED {method}: {err}", err=True)
        sys.exit(1)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--corpus", "corpus_path", type=click.Path(), required=True)
@click.option("--parameter", type=click.Choice(SWEEP_PARAMETERS), required=True)
@click.option("--out", "out_path", type=click.Path(), default=None, help="CSV output; defaults to sweep_<parameter>.csv")
@click.option("--workers", type=int, default=None)
def sweep(config_path, corpus_path, parameter, out_path, workers):
    """Re-evaluate decisions under perturbed costs, gates, or priors."""
    from . import ops

    try:
        config = _load(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    out_path = out_path or f"sweep_{parameter}.csv"
    try:
        rows = ops.run_sweep(config, corpus_path, parameter, out_path, workers)
    except FileNotFoundError as exc:
        raise click.ClickException(str(exc))
    for row in rows:
        click.echo(
            f"{row['setting']}: total_cost={row['total_cost']:.0f} "
            f"flips={row['flip_fraction']:.3f}"
        )
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(config_path, host, port):
    """Start the decision service."""
    import uvicorn

    from .service.app import create_app

    try:
        config = _load(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    uvicorn.run(create_app(config), host=host, port=port)


if __name__ == "__main__":
    main()
