"""Full-batch training: cross-entropy on seed superpixels, backprop, Adam.

Adjacencies are treated as data inside each backward pass: gradients flow
through the graph convolutions but not through the dynamic graph update.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit, logsumexp

from .cmdline import format_variant, parse_variant
from .constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_HIDDEN,
    DEFAULT_ITERATIONS,
    DEFAULT_LAYERS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_LOG_EVERY,
    DEFAULT_SCALES,
    DEFAULT_SEED,
    VARIANT_FIXED_GRAPH,
    VARIANT_SINGLE_SCALE,
)
from .dyngcn import Model, forward, init_model
from .errors import DivergenceError, NumericError, ParameterError, TrainingSetupError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = DEFAULT_ITERATIONS
    learning_rate: float = DEFAULT_LEARNING_RATE
    scales: tuple = DEFAULT_SCALES
    layers: int = DEFAULT_LAYERS
    hidden: int = DEFAULT_HIDDEN
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    seed: int = DEFAULT_SEED
    variant: str = "mdgcn"
    log_every: int = DEFAULT_LOG_EVERY

    def __post_init__(self):
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ParameterError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.layers < 1 or self.hidden < 1:
            raise ParameterError("layers and hidden width must be >= 1")
        if not self.scales or min(self.scales) < 1:
            raise ParameterError(f"scales must be hop counts >= 1, got {self.scales}")
        if self.alpha < 0 or self.beta < 0:
            raise ParameterError(f"alpha and beta must be >= 0, got {self.alpha}, {self.beta}")
        object.__setattr__(self, "scales", tuple(int(s) for s in self.scales))
        # Canonicalise the variant spelling; raises on unknown variants.
        object.__setattr__(self, "variant", format_variant(*parse_variant(self.variant)))

    @property
    def dynamic(self):
        return parse_variant(self.variant)[0] != VARIANT_FIXED_GRAPH

    @property
    def effective_scales(self):
        kind, scale = parse_variant(self.variant)
        return (scale,) if kind == VARIANT_SINGLE_SCALE else tuple(self.scales)


@dataclass
class OptimState:
    first: list
    second: list
    step: int = 0


@dataclass(frozen=True)
class HistoryRow:
    iteration: int
    train_loss: float
    val_acc: float
    elapsed_s: float


@dataclass
class TrainResult:
    model: Model
    best_model: Model
    history: list = field(default_factory=list)
    best_iteration: int = 0
    best_val_acc: Optional[float] = None


# ── Loss and gradients ────────────────────────────────────────────────


def loss(probs, y, labeled):
    """Cross-entropy ``-sum_{g in labeled} sum_f Y[g, f] ln P[g, f]``."""
    labeled = np.asarray(labeled, dtype=np.int64)
    if labeled.size == 0:
        raise TrainingSetupError("no labeled nodes to train on")
    if (probs <= 0).any():
        raise NumericError("class probabilities must be strictly positive")
    return float(-(y[labeled] * np.log(probs[labeled])).sum())


def _cross_entropy_from_logits(output, y, labeled):
    log_probs = output[labeled] - logsumexp(output[labeled], axis=1, keepdims=True)
    return float(-(y[labeled] * log_probs).sum())


def _backward(model, trace, graphs, y, labeled):
    d_out = np.zeros_like(trace.output)
    y_lab = y[labeled]
    d_out[labeled] = trace.probs[labeled] * y_lab.sum(axis=1, keepdims=True) - y_lab

    grads = []
    for s, layers in enumerate(model.weights):
        scale_grads = [None] * len(layers)
        upstream = d_out
        for l in reversed(range(len(layers))):
            d_pre = upstream * expit(trace.preactivations[s][l])
            propagated = trace.adjacency[s][l].T @ d_pre
            grad = trace.activations[s][l].T @ propagated
            if not np.isfinite(grad).all():
                raise NumericError(
                    f"non-finite gradient at scale {graphs[s].scale}, layer {l + 1}"
                )
            scale_grads[l] = grad
            upstream = propagated @ layers[l].T
        grads.append(scale_grads)
    return grads


def loss_and_gradients(model, features, graphs, y, labeled, dynamic=True, frozen_adjacency=None):
    """Forward pass, loss and ``d loss / d W[s][l]`` in one go.

    Returns ``(loss_value, grads, trace)``.
    """
    labeled = np.asarray(labeled, dtype=np.int64)
    if labeled.size == 0:
        raise TrainingSetupError("no labeled nodes to train on")
    trace = forward(model, features, graphs, dynamic=dynamic, frozen_adjacency=frozen_adjacency)
    value = _cross_entropy_from_logits(trace.output, y, labeled)
    return value, _backward(model, trace, graphs, y, labeled), trace


def compute_gradients(model, features, graphs, y, labeled, dynamic=True, frozen_adjacency=None):
    return loss_and_gradients(model, features, graphs, y, labeled, dynamic, frozen_adjacency)[1]


# ── Optimizer ─────────────────────────────────────────────────────────


def init_optim_state(model):
    return OptimState(
        [[np.zeros_like(w) for w in layers] for layers in model.weights],
        [[np.zeros_like(w) for w in layers] for layers in model.weights],
    )


def adam_step(model, grads, state, learning_rate):
    """One bias-corrected Adam update. Returns a new (model, state) pair."""
    step = state.step + 1
    bc1 = 1.0 - ADAM_BETA1**step
    bc2 = 1.0 - ADAM_BETA2**step
    new_model = model.copy()
    first, second = [], []
    for s, layers in enumerate(grads):
        first.append([])
        second.append([])
        for l, g in enumerate(layers):
            if g.shape != model.weights[s][l].shape:
                raise ParameterError(
                    f"gradient {g.shape} does not match weight {model.weights[s][l].shape}"
                )
            m = ADAM_BETA1 * state.first[s][l] + (1.0 - ADAM_BETA1) * g
            v = ADAM_BETA2 * state.second[s][l] + (1.0 - ADAM_BETA2) * (g * g)
            new_model.weights[s][l] -= learning_rate * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPSILON)
            first[s].append(m)
            second[s].append(v)
    return new_model, OptimState(first, second, step)


# ── Training loop ─────────────────────────────────────────────────────


def node_accuracy(probs, node_labels):
    """Fraction of labeled nodes whose argmax class matches; NaN without any."""
    idx = node_labels.labeled_indices
    if idx.size == 0:
        return float("nan")
    predicted = np.argmax(probs[idx], axis=1) + 1
    return float((predicted == node_labels.labels[idx]).mean())


def select_graphs(graphs, scales):
    by_scale = {g.scale: g for g in graphs}
    missing = [s for s in scales if s not in by_scale]
    if missing:
        raise ParameterError(f"no graph built for scale(s) {missing}")
    return [by_scale[s] for s in scales]


def train(config, features, graphs, node_labels, val_labels):
    """Run ``config.iterations`` rounds of forward, loss, backward, Adam.

    Keeps the weights that scored the best validation accuracy (latest on
    ties); without validation nodes the final weights double as the best.
    """
    labeled = node_labels.labeled_indices
    if labeled.size == 0:
        raise TrainingSetupError("no superpixel holds a training pixel")
    graphs = select_graphs(graphs, config.effective_scales)
    y = node_labels.one_hot()
    model = init_model(
        features.n_bands,
        node_labels.n_classes,
        len(graphs),
        config.layers,
        config.hidden,
        config.alpha,
        config.beta,
        config.seed,
    )
    state = init_optim_state(model)
    log.debug(
        "graph projection uses the normalized initial adjacency; "
        "updated graphs are renormalized; softmax precedes the loss"
    )
    log.info(
        "training %s on %d nodes (%d labeled), scales %s, %d parameters",
        config.variant,
        features.n_nodes,
        labeled.size,
        config.effective_scales,
        model.n_parameters(),
    )

    result = TrainResult(model=model, best_model=model)
    best_acc = None
    start = time.perf_counter()
    for it in range(1, config.iterations + 1):
        value, grads, trace = loss_and_gradients(
            model, features, graphs, y, labeled, dynamic=config.dynamic
        )
        if not np.isfinite(value):
            raise DivergenceError(
                f"loss became {value} at iteration {it}; try smaller alpha/beta or learning rate"
            )
        val_acc = node_accuracy(trace.probs, val_labels)
        result.history.append(HistoryRow(it, value, val_acc, time.perf_counter() - start))
        if not np.isnan(val_acc) and (best_acc is None or val_acc >= best_acc):
            best_acc = val_acc
            result.best_model = model.copy()
            result.best_iteration = it
        model, state = adam_step(model, grads, state, config.learning_rate)
        if config.log_every and it % config.log_every == 0:
            log.info("iter %d: loss %.6f, val_acc %.4f", it, value, val_acc)

    result.model = model
    if best_acc is None:
        result.best_model = model
        result.best_iteration = config.iterations
    result.best_val_acc = best_acc
    log.info(
        "finished %d iterations in %.1fs, best val_acc %s at iteration %d",
        config.iterations,
        time.perf_counter() - start,
        "n/a" if best_acc is None else f"{best_acc:.4f}",
        result.best_iteration,
    )
    return result


def _write_lines(lines, path):
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def write_history(history, path):
    lines = ["iter,train_loss,val_acc"]
    lines += [f"{row.iteration},{row.train_loss!r},{row.val_acc!r}" for row in history]
    _write_lines(lines, path)


def write_timing(history, path):
    """Wall-clock seconds since training started, per history row."""
    lines = ["iter,elapsed_s"]
    lines += [f"{row.iteration},{row.elapsed_s:.6f}" for row in history]
    _write_lines(lines, path)
