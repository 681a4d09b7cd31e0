"""Variant comparison and labeled-example sweeps over several seeds.

Each (variant or label count, seed) pair is one independent pipeline run
sharing a single precomputed scene. Runs can fan out over worker processes;
rows come back in submission order whatever the schedule.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cmdline import format_variant
from .constants import VARIANT_FIXED_GRAPH, VARIANT_MDGCN, VARIANT_SINGLE_SCALE
from .errors import ParameterError
from .pipeline import build_scene, run_and_score

log = logging.getLogger(__name__)

DEFAULT_SWEEP_COUNTS = (5, 10, 15, 20, 25, 30)


@dataclass(frozen=True)
class ScoreRow:
    """One run's test scores; ``key`` is the variant name or the per-class count."""

    key: object
    seed: int
    oa: float
    aa: float
    kappa: float
    best_val_acc: float


def ablation_variants(scales):
    return [
        VARIANT_MDGCN,
        VARIANT_FIXED_GRAPH,
        *(format_variant(VARIANT_SINGLE_SCALE, s) for s in scales),
    ]


def _score(job):
    key, cube, labels, config, scene = job
    result, report = run_and_score(cube, labels, config, scene=scene)
    best = result.training.best_val_acc
    return ScoreRow(
        key, config.seed, report.oa, report.aa, report.kappa, float("nan") if best is None else best
    )


def _run_jobs(jobs, n_workers):
    if n_workers < 1:
        raise ParameterError(f"--jobs must be >= 1, got {n_workers}")
    if n_workers == 1 or len(jobs) == 1:
        rows = []
        for job in jobs:
            rows.append(_score(job))
            log.info("%s seed %d: OA %.4f", rows[-1].key, rows[-1].seed, rows[-1].oa)
        return rows
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        rows = list(pool.map(_score, jobs))
    for row in rows:
        log.info("%s seed %d: OA %.4f", row.key, row.seed, row.oa)
    return rows


def run_ablation(cube, labels, config, seeds, n_workers=1):
    """Train every variant once per seed on a shared scene."""
    scene = build_scene(cube, config)
    jobs = [
        (variant, cube, labels, config.updated(variant=variant, seed=seed), scene)
        for variant in ablation_variants(config.scales)
        for seed in seeds
    ]
    log.info(
        "ablation: %d run(s) over %d seed(s) on %d superpixels",
        len(jobs),
        len(seeds),
        scene.seg.n_segments,
    )
    return _run_jobs(jobs, n_workers)


def sweep_labels(cube, labels, config, counts=DEFAULT_SWEEP_COUNTS, seeds=(0,), n_workers=1):
    """Score ``config.variant`` for each labeled-examples-per-class count and seed."""
    if not counts:
        raise ParameterError("at least one per-class count is required")
    scene = build_scene(cube, config)
    jobs = [
        (count, cube, labels, config.updated(per_class=count, seed=seed, split=None), scene)
        for count in counts
        for seed in seeds
    ]
    return _run_jobs(jobs, n_workers)


def summarize(rows):
    """Per key: run count, then mean, std (population) and median of OA, AA and kappa."""
    keys = list(dict.fromkeys(row.key for row in rows))
    summary = []
    for key in keys:
        group = [row for row in rows if row.key == key]
        entry = {"key": key, "runs": len(group)}
        for metric in ("oa", "aa", "kappa"):
            values = np.array([getattr(row, metric) for row in group])
            entry[f"{metric}_mean"] = float(values.mean())
            entry[f"{metric}_std"] = float(values.std())
            entry[f"{metric}_median"] = float(np.median(values))
        summary.append(entry)
    return summary


def write_rows(rows, path, key_name):
    lines = [f"{key_name},seed,oa,aa,kappa,best_val_acc"]
    lines += [
        f"{row.key},{row.seed},{row.oa!r},{row.aa!r},{row.kappa!r},{row.best_val_acc!r}"
        for row in rows
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary(summary, path, key_name):
    columns = ["runs"] + [f"{m}_{s}" for m in ("oa", "aa", "kappa") for s in ("mean", "std", "median")]
    lines = [",".join([key_name, *columns])]
    for entry in summary:
        lines.append(",".join([str(entry["key"]), *(repr(entry[c]) for c in columns)]))
    Path(path).write_text("\n".join(lines) + "\n")
