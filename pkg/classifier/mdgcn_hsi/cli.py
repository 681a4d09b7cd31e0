"""Command-line front end: ``mdgcn-hsi <command> [options]``.

Every run-level option is a :class:`RunConfig` field. Options left off the
command line fall back to ``--config`` (a saved ``config.json``) and then to
the built-in defaults, so ``train`` followed by ``predict --config
out/config.json`` reuses exactly the settings the model was trained with.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .ablation import (
    DEFAULT_SWEEP_COUNTS,
    run_ablation,
    summarize,
    sweep_labels,
    write_rows,
    write_summary,
)
from .cmdline import default_palette, format_scales, parse_counts, parse_scales, read_palette
from .constants import (
    ABLATION_FILE,
    ABLATION_SUMMARY_FILE,
    BOUNDARY_FILE,
    CHECKPOINT_FILE,
    CONFIG_FILE,
    EXIT_OK,
    EXIT_USAGE,
    FINAL_CHECKPOINT_FILE,
    HISTORY_FILE,
    MAP_FILE,
    PREDICTION_FILE,
    REPORT_FILE,
    SEGMENTATION_FILE,
    SPLIT_FILE,
    SWEEP_FILE,
    TIMING_FILE,
)
from .datacube_io import (
    LabelMap,
    SplitSpec,
    load_cube,
    load_labels,
    read_split,
    save_cube,
    save_labels,
    write_split,
)
from .dyngcn import load_model, save_model
from .errors import MdgcnError, ParameterError
from .evaluation import evaluate, write_map, write_report
from .graph import write_graph
from .pipeline import build_scene, check_checkpoint, predict_with, resolve_split, run
from .run_config import RunConfig, read_run_config, write_run_config
from .superpixel import (
    default_superpixel_count,
    slic_segment,
    write_boundary_overlay,
    write_segmentation,
)
from .synthetic import make_synthetic_scene
from .train import write_history, write_timing

log = logging.getLogger(__name__)

_LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


# ── Argument parsing ──────────────────────────────────────────────────


def _default(key):
    value = RunConfig.DEFAULTS[key]
    return format_scales(value) if key == "scales" else value


def _add_scene_options(p):
    p.add_argument("--config", help="resolved config.json to start from")
    p.add_argument("--cube", help="HSIC hyperspectral cube")
    p.add_argument("--out", help=f"output directory (default: {_default('out')})")
    p.add_argument("--k", type=int, help="target superpixel count (default: ceil(H*W/100))")
    p.add_argument("--m", type=float, help=f"SLIC compactness (default: {_default('m')})")
    p.add_argument(
        "--slic-iters", type=int, help=f"SLIC iteration cap (default: {_default('slic_iters')})"
    )


def _add_label_options(p):
    p.add_argument("--labels", help="HSIL ground-truth label map")
    p.add_argument("--split", help="split file (row,col,class,role); drawn from --seed when absent")
    p.add_argument(
        "--per-class",
        type=int,
        help=f"labeled pixels drawn per class (default: {_default('per_class')})",
    )
    p.add_argument(
        "--val-fraction",
        type=float,
        help=f"share of drawn pixels held out for validation (default: {_default('val_fraction')})",
    )
    p.add_argument("--seed", type=int, help=f"sampling and init seed (default: {_default('seed')})")


def _add_model_options(p):
    p.add_argument("--gamma", type=float, help=f"Gaussian kernel width (default: {_default('gamma')})")
    p.add_argument(
        "--scales", type=parse_scales, help=f"hop counts, comma separated (default: {_default('scales')})"
    )
    p.add_argument("--layers", type=int, help=f"graph conv layers (default: {_default('layers')})")
    p.add_argument("--hidden", type=int, help=f"hidden width (default: {_default('hidden')})")
    p.add_argument(
        "--alpha", type=float, help=f"embedding-kernel weight (default: {_default('alpha')})"
    )
    p.add_argument("--beta", type=float, help=f"graph noise weight (default: {_default('beta')})")
    p.add_argument("--iters", type=int, help=f"training iterations (default: {_default('iters')})")
    p.add_argument("--lr", type=float, help=f"Adam learning rate (default: {_default('lr')})")
    p.add_argument(
        "--variant",
        help="mdgcn, fixed-graph or single-scale=S (default: mdgcn)",
    )
    p.add_argument(
        "--log-every",
        type=int,
        help=f"log progress every N iterations, 0 = never (default: {_default('log_every')})",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mdgcn-hsi",
        description="Superpixel graph convolution for hyperspectral classification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        p.set_defaults(handler=handler)
        return p

    p = add("segment", cmd_segment, "segment a cube into superpixels")
    _add_scene_options(p)

    p = add("train", cmd_train, "segment, build graphs and train")
    _add_scene_options(p)
    _add_label_options(p)
    _add_model_options(p)
    p.add_argument(
        "--export-graphs", action="store_true", help="write graph_s<scale>.csv edge lists"
    )

    for name, handler, help_text in (
        ("predict", cmd_predict, "classify every pixel with a trained checkpoint"),
        ("evaluate", cmd_evaluate, "predict and score against ground truth"),
    ):
        p = add(name, handler, help_text)
        _add_scene_options(p)
        _add_label_options(p)
        _add_model_options(p)
        p.add_argument("--checkpoint", help=f"model file (default: <out>/{CHECKPOINT_FILE})")
        p.add_argument("--map", help=f"classification map PPM (default: <out>/{MAP_FILE})")
        p.add_argument("--palette", help="class,r,g,b palette file")

    p = add("ablate", cmd_ablate, "compare mdgcn, fixed-graph and single-scale variants")
    _add_scene_options(p)
    _add_label_options(p)
    _add_model_options(p)
    p.add_argument("--seeds", type=int, help="number of consecutive seeds (default: 5)")
    p.add_argument("--jobs", type=int, help="worker processes (default: 1)")

    p = add("sweep-labels", cmd_sweep_labels, "score across labeled-examples-per-class counts")
    _add_scene_options(p)
    _add_label_options(p)
    _add_model_options(p)
    p.add_argument(
        "--counts",
        type=parse_counts,
        help=f"per-class counts (default: {format_scales(DEFAULT_SWEEP_COUNTS)})",
    )
    p.add_argument("--seeds", type=int, help="number of consecutive seeds (default: 1)")
    p.add_argument("--jobs", type=int, help="worker processes (default: 1)")

    p = add("make-synthetic", cmd_make_synthetic, "write a block-structured test scene")
    p.add_argument("--out", help="output directory (default: .)")
    p.add_argument("--height", type=int, help="default: 64")
    p.add_argument("--width", type=int, help="default: 64")
    p.add_argument("--bands", type=int, help="default: 16")
    p.add_argument("--classes", type=int, help="default: 4")
    p.add_argument("--block", type=int, help="block side in pixels (default: 16)")
    p.add_argument("--noise", type=float, help="pixel noise std (default: 0.1)")
    p.add_argument("--seed", type=int, help="default: 0")
    return parser


def resolve_config(args):
    """``--config`` file (or defaults) overridden by every option given on the command line."""
    path = getattr(args, "config", None)
    base = read_run_config(path) if path else RunConfig()
    overrides = {k: v for k, v in vars(args).items() if k in RunConfig.DEFAULTS}
    return base.updated(**overrides)


def _require(config, *keys):
    for key in keys:
        if getattr(config, key) is None:
            raise ParameterError(f"--{key.replace('_', '-')} is required")


def _out_dir(config):
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ── Commands ──────────────────────────────────────────────────────────


def cmd_segment(args):
    config = resolve_config(args)
    _require(config, "cube")
    cube = load_cube(config.cube)
    k = default_superpixel_count(cube) if config.k is None else config.k
    seg = slic_segment(cube, k, config.m, config.slic_iters)
    out = _out_dir(config)
    write_segmentation(seg, out / SEGMENTATION_FILE)
    write_boundary_overlay(cube, seg, out / BOUNDARY_FILE)
    print(f"M={seg.n_segments}")
    return EXIT_OK


def cmd_train(args):
    config = resolve_config(args)
    _require(config, "cube", "labels")
    cube = load_cube(config.cube)
    labels = load_labels(config.labels, cube)
    out = _out_dir(config)

    split = resolve_split(labels, config)
    split_path = (out / SPLIT_FILE).resolve()
    write_split(split, split_path)
    scene = build_scene(cube, config)
    write_segmentation(scene.seg, out / SEGMENTATION_FILE)
    write_boundary_overlay(cube, scene.seg, out / BOUNDARY_FILE)
    print(f"M={scene.seg.n_segments}")
    if getattr(args, "export_graphs", False):
        for graph in scene.graphs:
            write_graph(graph, out / f"graph_s{graph.scale}.csv")

    result = run(cube, labels, config, split=split, scene=scene)
    save_model(result.training.best_model, out / CHECKPOINT_FILE)
    save_model(result.training.model, out / FINAL_CHECKPOINT_FILE)
    write_history(result.training.history, out / HISTORY_FILE)
    write_timing(result.training.history, out / TIMING_FILE)
    write_run_config(config.updated(k=scene.k, split=str(split_path)), out / CONFIG_FILE)

    best = result.training.best_val_acc
    print(
        f"best_val_acc={'n/a' if best is None else f'{best:.4f}'} "
        f"at iteration {result.training.best_iteration}"
    )
    return EXIT_OK


def _predict(args, require_labels):
    config = resolve_config(args)
    _require(config, "cube", *(("labels",) if require_labels else ()))
    out = _out_dir(config)
    model = load_model(getattr(args, "checkpoint", None) or out / CHECKPOINT_FILE)
    cube = load_cube(config.cube)
    labels = load_labels(config.labels, cube) if config.labels else None
    check_checkpoint(model, cube, config, labels.n_classes if labels else None)

    _, prediction = predict_with(model, cube, config)
    save_labels(LabelMap(prediction), out / PREDICTION_FILE)
    palette = read_palette(config.palette) if config.palette else default_palette(model.n_classes)
    write_map(prediction, palette, getattr(args, "map", None) or out / MAP_FILE)
    if labels is None:
        return EXIT_OK

    if config.split:
        split = read_split(config.split, labels, config.seed)
    else:
        log.warning("no split given; scoring every labeled pixel, training pixels included")
        split = SplitSpec()
    report = evaluate(prediction, labels, split, model.n_classes)
    write_report(report, out / REPORT_FILE)
    print(f"OA={report.oa:.4f} AA={report.aa:.4f} kappa={report.kappa:.4f}")
    return EXIT_OK


def cmd_predict(args):
    return _predict(args, require_labels=False)


def cmd_evaluate(args):
    return _predict(args, require_labels=True)


def _seeds(args, config, default):
    n = getattr(args, "seeds", default)
    if n < 1:
        raise ParameterError(f"--seeds must be >= 1, got {n}")
    return list(range(config.seed, config.seed + n))


def cmd_ablate(args):
    config = resolve_config(args)
    _require(config, "cube", "labels")
    cube = load_cube(config.cube)
    labels = load_labels(config.labels, cube)
    out = _out_dir(config)
    rows = run_ablation(cube, labels, config, _seeds(args, config, 5), getattr(args, "jobs", 1))
    summary = summarize(rows)
    write_rows(rows, out / ABLATION_FILE, "variant")
    write_summary(summary, out / ABLATION_SUMMARY_FILE, "variant")
    write_run_config(config, out / CONFIG_FILE)
    for entry in summary:
        print(
            f"{entry['key']}: OA {entry['oa_mean']:.4f} ± {entry['oa_std']:.4f} "
            f"(median {entry['oa_median']:.4f}), kappa {entry['kappa_mean']:.4f}"
        )
    return EXIT_OK


def cmd_sweep_labels(args):
    config = resolve_config(args)
    _require(config, "cube", "labels")
    cube = load_cube(config.cube)
    labels = load_labels(config.labels, cube)
    out = _out_dir(config)
    counts = getattr(args, "counts", DEFAULT_SWEEP_COUNTS)
    rows = sweep_labels(
        cube, labels, config, counts, _seeds(args, config, 1), getattr(args, "jobs", 1)
    )
    write_rows(rows, out / SWEEP_FILE, "per_class")
    for entry in summarize(rows):
        print(f"{entry['key']} per class: OA {entry['oa_mean']:.4f} ± {entry['oa_std']:.4f}")
    return EXIT_OK


def cmd_make_synthetic(args):
    cube, labels = make_synthetic_scene(
        height=getattr(args, "height", 64),
        width=getattr(args, "width", 64),
        bands=getattr(args, "bands", 16),
        n_classes=getattr(args, "classes", 4),
        block=getattr(args, "block", 16),
        noise=getattr(args, "noise", 0.1),
        seed=getattr(args, "seed", 0),
    )
    out = Path(getattr(args, "out", "."))
    out.mkdir(parents=True, exist_ok=True)
    save_cube(cube, out / "cube.hsic")
    save_labels(labels, out / "labels.hsil")
    print(out / "cube.hsic")
    print(out / "labels.hsil")
    return EXIT_OK


# ── Entry point ───────────────────────────────────────────────────────


def _error(message):
    print(f"mdgcn-hsi: error: {message}", file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=_LOG_FORMAT, force=True)

    try:
        return args.handler(args)
    except FileNotFoundError as exc:
        _error(f"{exc.filename}: no such file")
        return EXIT_USAGE
    except IsADirectoryError as exc:
        _error(f"{exc.filename}: is a directory")
        return EXIT_USAGE
    except OSError as exc:
        _error(f"{exc.filename}: {exc.strerror}" if exc.filename else str(exc))
        return EXIT_USAGE
    except MdgcnError as exc:
        _error(str(exc))
        return exc.exit_code
