"""``bench`` command line: run, report, baseline and scores."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from ..clustering.methods import METHODS
from ..errors import MissingMethod
from .baseline import baseline_csv, random_baseline
from .config import BenchmarkConfig
from .reports import PHASES, phase_report, render_text, write_report
from .runner import run_benchmark
from .store import ResultStore, records_to_csv, records_to_json

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _split(value):
    return tuple(v.strip() for v in value.split(",") if v.strip()) if value else None


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more log output.")
def main(verbose):
    """Time series clustering benchmark."""
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")


@main.command()
@click.option("--archive-dir", envvar="BENCH_ARCHIVE_DIR", required=True, type=click.Path(path_type=Path),
              help="UCR-format archive root (default: $BENCH_ARCHIVE_DIR).")
@click.option("--methods", default=",".join(METHODS), show_default=True, help="Comma-separated method names.")
@click.option("--datasets", default=None, help="Comma-separated dataset names (default: all).")
@click.option("--runs", default=10, show_default=True, type=int)
@click.option("--seed", "base_seed", default=0, show_default=True, type=int)
@click.option("--window-frac", default=0.05, show_default=True, type=float)
@click.option("--neighbor-frac", default=0.02, show_default=True, type=float)
@click.option("--merge-policy", default="merged", show_default=True,
              type=click.Choice(["merged", "train_only", "test_only"]))
@click.option("--assignment-mode", default="closest_centroid", show_default=True,
              type=click.Choice(["closest_centroid", "higher_density_chain"]))
@click.option("--threads", default=1, show_default=True, type=int)
@click.option("--out", "output_dir", required=True, type=click.Path(path_type=Path))
def run(archive_dir, methods, datasets, runs, base_seed, window_frac, neighbor_frac, merge_policy,
        assignment_mode, threads, output_dir):
    """Cluster every admissible dataset with every selected method."""
    try:
        cfg = BenchmarkConfig(
            archive_dir=archive_dir, output_dir=output_dir, methods=_split(methods), datasets=_split(datasets),
            runs=runs, base_seed=base_seed, window_fraction=window_frac, neighbor_fraction=neighbor_frac,
            merge_policy=merge_policy, assignment_mode=assignment_mode, threads=threads,
        )
        result = run_benchmark(cfg)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    n_ok = sum(1 for row in result.store.status if row["status"] == "ok")
    click.echo(f"{len(result.store)} scores from {n_ok} fits written to {output_dir}")
    if result.n_failed:
        click.echo(f"{result.n_failed} (dataset, method) pairs failed; see status.csv", err=True)
    sys.exit(result.exit_code)


@main.command()
@click.option("--phase", required=True, type=click.IntRange(1, len(PHASES)))
@click.option("--store", "store_dir", required=True, type=click.Path(path_type=Path))
@click.option("--measure", default="ari", show_default=True)
@click.option("--ties", default="strict", show_default=True, type=click.Choice(["strict", "shared", "fractional"]))
@click.option("--threshold", default=0.05, show_default=True, type=float)
@click.option("--out", "out_dir", default=None, type=click.Path(path_type=Path),
              help="Also write JSON, text and scatter CSVs here.")
def report(phase, store_dir, measure, ties, threshold, out_dir):
    """Print the comparison for one evaluation phase."""
    try:
        store = ResultStore.load(store_dir)
        doc = phase_report(store, phase, measure, threshold, ties)
    except MissingMethod as exc:
        click.echo(f"error: store lacks methods: {', '.join(exc.methods)}", err=True)
        sys.exit(EXIT_FATAL)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    click.echo(render_text(doc), nl=False)
    if out_dir is not None:
        write_report(doc, out_dir)


@main.command()
@click.option("--points", default=1000, show_default=True, type=int)
@click.option("--k-min", default=2, show_default=True, type=int)
@click.option("--k-max", default=10, show_default=True, type=int)
@click.option("--trials", default=100, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--truth-k", default=None, type=int, help="Fix the number of true classes instead of matching k.")
@click.option("--out", default=None, type=click.Path(path_type=Path), help="CSV path (default: stdout).")
def baseline(points, k_min, k_max, trials, seed, truth_k, out):
    """Mean index values for random partitions across k."""
    try:
        rows = random_baseline(points, range(k_min, k_max + 1), trials, seed, truth_k)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    text = baseline_csv(rows)
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


@main.command()
@click.option("--store", "store_dir", default=".", show_default=True, type=click.Path(path_type=Path))
@click.option("--format", "fmt", default="csv", show_default=True, type=click.Choice(["csv", "json"]))
@click.option("--out", default=None, type=click.Path(path_type=Path), help="Output path (default: stdout).")
def scores(store_dir, fmt, out):
    """Export the stored dataset-level scores."""
    try:
        store = ResultStore.load(store_dir)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FATAL)
    text = records_to_csv(store.records) if fmt == "csv" else records_to_json(store.records)
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


if __name__ == "__main__":
    main()
