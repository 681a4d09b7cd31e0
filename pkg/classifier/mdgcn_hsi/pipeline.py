"""End-to-end orchestration: cube -> superpixels -> graphs -> training -> pixel map.

The scene (segmentation, node features, per-scale graphs) depends only on
the cube and the superpixel/graph settings, so one scene can serve many
training runs that differ in seed, split or variant.
"""

import logging
from dataclasses import dataclass

from .cmdline import parse_variant
from .datacube_io import SplitSpec, read_split, sample_training_pixels, standardize
from .dyngcn import forward
from .errors import CheckpointError
from .evaluation import evaluate, predict_pixels
from .graph import build_scale_graphs
from .superpixel import (
    base_adjacency,
    default_superpixel_count,
    project_labels,
    slic_segment,
    superpixel_features,
)
from .train import select_graphs, train

log = logging.getLogger(__name__)


@dataclass(eq=False)
class Scene:
    seg: object
    features: object
    base: list
    graphs: list
    k: int


@dataclass(eq=False)
class RunResult:
    config: object
    scene: Scene
    split: SplitSpec
    train_labels: object
    val_labels: object
    training: object
    trace: object
    prediction: object


def required_scales(config):
    """Configured scales plus the single-scale variant's hop count, if not among them."""
    scales = list(config.scales)
    _, scale = parse_variant(config.variant)
    if scale is not None and scale not in scales:
        scales.append(scale)
    return tuple(scales)


def build_scene(cube, config, scales=None):
    k = default_superpixel_count(cube) if config.k is None else config.k
    seg = slic_segment(cube, k, config.m, config.slic_iters)
    features = superpixel_features(standardize(cube), seg)
    base = base_adjacency(seg)
    graphs = build_scale_graphs(features, base, scales or required_scales(config), config.gamma)
    log.info(
        "scene: %d superpixels, %d base edges, scales %s",
        seg.n_segments,
        sum(len(n) for n in base) // 2,
        [g.scale for g in graphs],
    )
    return Scene(seg, features, base, graphs, k)


def resolve_split(labels, config):
    """Read ``config.split`` when set, otherwise draw a fresh split from ``config.seed``."""
    if config.split:
        return read_split(config.split, labels, config.seed)
    return sample_training_pixels(labels, config.per_class, config.val_fraction, config.seed)


def run(cube, labels, config, split=None, scene=None):
    """Segment, build graphs, train and predict. Returns a :class:`RunResult`."""
    if scene is None:
        scene = build_scene(cube, config)
    if split is None:
        split = resolve_split(labels, config)
    train_labels, val_labels = project_labels(scene.seg, split, labels.n_classes)
    tc = config.train_config()
    training = train(tc, scene.features, scene.graphs, train_labels, val_labels)
    trace = forward(
        training.best_model,
        scene.features,
        select_graphs(scene.graphs, tc.effective_scales),
        dynamic=tc.dynamic,
    )
    return RunResult(
        config,
        scene,
        split,
        train_labels,
        val_labels,
        training,
        trace,
        predict_pixels(trace, scene.seg),
    )


def run_and_score(cube, labels, config, split=None, scene=None):
    result = run(cube, labels, config, split, scene)
    return result, evaluate(result.prediction, labels, result.split, labels.n_classes)


def check_checkpoint(model, cube, config, n_classes=None):
    tc = config.train_config()
    if model.n_bands != cube.bands:
        raise CheckpointError(f"checkpoint expects {model.n_bands} bands, cube has {cube.bands}")
    if model.n_scales != len(tc.effective_scales):
        raise CheckpointError(
            f"checkpoint has {model.n_scales} scale(s), configuration {config.variant} "
            f"with scales {tc.effective_scales} needs {len(tc.effective_scales)}"
        )
    if n_classes is not None and model.n_classes != n_classes:
        raise CheckpointError(
            f"checkpoint predicts {model.n_classes} classes, labels have {n_classes}"
        )


def predict_with(model, cube, config, scene=None):
    """Apply a trained model to ``cube``; returns ``(trace, pixel_prediction)``."""
    check_checkpoint(model, cube, config)
    tc = config.train_config()
    if scene is None:
        scene = build_scene(cube, config, tc.effective_scales)
    trace = forward(
        model, scene.features, select_graphs(scene.graphs, tc.effective_scales), dynamic=tc.dynamic
    )
    return trace, predict_pixels(trace, scene.seg)
