"""Multi-scale dynamic graph convolution: the forward pass.

Per scale ``s`` and layer ``l``::

    H[s][l]   = softplus(A[s][l] @ H[s][l-1] @ W[s][l])
    A[s][l+1] = normalize(P @ (A[s][l] + alpha * H[s][l] H[s][l]^T) @ P^T + beta[l] I)

where ``P`` is the scale's normalized initial adjacency. The network output is
``O = sum_s H[s][L]`` and ``P_out = softmax(O)`` row-wise.

Checkpoint layout (little-endian)::

    "MDGC" | S, L, B, h, C (uint32) | alpha, beta[1..L-1] (float64)
           | weights, scale-major then layer-major, each row-major (float64)
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import softmax

from .constants import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_HIDDEN,
    DEFAULT_LAYERS,
    DEFAULT_SEED,
    HEADER_DTYPE,
    MODEL_DTYPE,
    MODEL_MAGIC,
)
from .errors import ContractError, FormatError, LengthError, ParameterError
from .graph import check_symmetric, normalize_adjacency

log = logging.getLogger(__name__)


@dataclass(eq=False)
class Model:
    """Weights ``weights[s][l]`` (0-based) plus the graph-evolution weights."""

    weights: list
    alpha: float = DEFAULT_ALPHA
    beta: tuple = ()
    hidden: int = DEFAULT_HIDDEN

    @property
    def n_scales(self):
        return len(self.weights)

    @property
    def n_layers(self):
        return len(self.weights[0])

    @property
    def n_bands(self):
        return self.weights[0][0].shape[0]

    @property
    def n_classes(self):
        return self.weights[0][-1].shape[1]

    def copy(self):
        return Model(
            [[w.copy() for w in layers] for layers in self.weights],
            self.alpha,
            tuple(self.beta),
            self.hidden,
        )

    def n_parameters(self):
        return sum(w.size for layers in self.weights for w in layers)


@dataclass(eq=False)
class ForwardTrace:
    """Everything one forward pass computed, kept for the backward pass.

    ``activations[s]`` holds H^(0)..H^(L); ``preactivations[s][l]`` and
    ``adjacency[s][l]`` belong to layer ``l + 1``.
    """

    activations: list = field(default_factory=list)
    preactivations: list = field(default_factory=list)
    adjacency: list = field(default_factory=list)
    output: np.ndarray = None
    probs: np.ndarray = None


def layer_dims(n_bands, n_classes, n_layers, hidden):
    return [n_bands] + [hidden] * (n_layers - 1) + [n_classes]


def init_model(
    n_bands,
    n_classes,
    n_scales,
    n_layers=DEFAULT_LAYERS,
    hidden=DEFAULT_HIDDEN,
    alpha=DEFAULT_ALPHA,
    beta=DEFAULT_BETA,
    seed=DEFAULT_SEED,
):
    """Glorot-uniform weights, ``U(-r, r)`` with ``r = sqrt(6 / (fan_in + fan_out))``."""
    if min(n_bands, n_classes, n_scales, n_layers, hidden) < 1:
        raise ParameterError("model dimensions must all be >= 1")
    if alpha < 0 or beta < 0:
        raise ParameterError(f"alpha and beta must be >= 0, got {alpha}, {beta}")
    rng = np.random.default_rng(seed)
    dims = layer_dims(n_bands, n_classes, n_layers, hidden)
    weights = []
    for _ in range(n_scales):
        layers = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            r = np.sqrt(6.0 / (fan_in + fan_out))
            layers.append(rng.uniform(-r, r, size=(fan_in, fan_out)))
        weights.append(layers)
    return Model(weights, float(alpha), (float(beta),) * (n_layers - 1), hidden)


# ── Building blocks ───────────────────────────────────────────────────


def softplus(x):
    """``ln(1 + e^x)`` evaluated as ``max(x, 0) + ln(1 + e^-|x|)``."""
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _propagate(a_hat, h_prev, w):
    if a_hat.shape[0] != a_hat.shape[1] or a_hat.shape[1] != h_prev.shape[0]:
        raise ContractError(f"adjacency {a_hat.shape} does not fit activations {h_prev.shape}")
    if h_prev.shape[1] != w.shape[0]:
        raise ContractError(f"activations {h_prev.shape} do not fit weights {w.shape}")
    return a_hat @ (h_prev @ w)


def layer_forward(a_hat, h_prev, w):
    """One graph convolution: ``softplus(A_hat @ H_prev @ W)``."""
    return softplus(_propagate(a_hat, h_prev, w))


def dynamic_update(p_op, a_cur, h, alpha, beta):
    """Fuse the current graph with the embedding kernel and project it back.

    Returns ``P @ (A + alpha * H H^T) @ P^T + beta * I``; entry ``(i, j)``
    grows when ``i`` and ``j`` share many strongly connected neighbours.
    """
    m = a_cur.shape[0]
    if p_op.shape != (m, m) or a_cur.shape != (m, m) or h.shape[0] != m:
        raise ContractError(
            f"dynamic update shapes disagree: P {p_op.shape}, A {a_cur.shape}, H {h.shape}"
        )
    if alpha < 0 or beta < 0:
        raise ParameterError(f"alpha and beta must be >= 0, got {alpha}, {beta}")
    check_symmetric(p_op, "projection operator")
    check_symmetric(a_cur)
    fused = a_cur + alpha * (h @ h.T)
    out = p_op @ fused @ p_op.T + beta * np.eye(m)
    return 0.5 * (out + out.T)


# ── Forward pass ──────────────────────────────────────────────────────


def _check_inputs(model, features, graphs):
    if len(graphs) != model.n_scales:
        raise ContractError(f"model has {model.n_scales} scales, got {len(graphs)} graphs")
    if features.n_bands != model.n_bands:
        raise ContractError(f"model expects {model.n_bands} bands, features have {features.n_bands}")
    if len(model.beta) != model.n_layers - 1:
        raise ContractError(f"need {model.n_layers - 1} beta values, got {len(model.beta)}")
    for g in graphs:
        if g.n_nodes != features.n_nodes:
            raise ContractError(
                f"scale-{g.scale} graph has {g.n_nodes} nodes, features have {features.n_nodes}"
            )


def forward(model, features, graphs, dynamic=True, frozen_adjacency=None):
    """Run every scale and fuse the outputs.

    ``dynamic=False`` keeps each scale's initial normalized adjacency for all
    layers. ``frozen_adjacency[s][l]``, when given, replaces the adjacency of
    layer ``l + 1`` at scale ``s`` outright.
    """
    _check_inputs(model, features, graphs)
    trace = ForwardTrace()
    output = np.zeros((features.n_nodes, model.n_classes))
    for s, (graph, layers) in enumerate(zip(graphs, model.weights)):
        h = features.features
        a_cur = graph.a_hat_init
        hs, zs, adj = [h], [], []
        for l, w in enumerate(layers):
            if frozen_adjacency is not None:
                a_cur = frozen_adjacency[s][l]
            z = _propagate(a_cur, h, w)
            h = softplus(z)
            hs.append(h)
            zs.append(z)
            adj.append(a_cur)
            if dynamic and l < model.n_layers - 1 and frozen_adjacency is None:
                a_cur = normalize_adjacency(
                    dynamic_update(graph.a_hat_init, a_cur, h, model.alpha, model.beta[l])
                )
        trace.activations.append(hs)
        trace.preactivations.append(zs)
        trace.adjacency.append(adj)
        output += h
    trace.output = output
    trace.probs = softmax(output, axis=1)
    return trace


# ── Checkpoints ───────────────────────────────────────────────────────


def save_model(model, path):
    dims = [model.n_scales, model.n_layers, model.n_bands, model.hidden, model.n_classes]
    parts = [
        MODEL_MAGIC,
        np.array(dims, dtype=HEADER_DTYPE).tobytes(),
        np.array([model.alpha, *model.beta], dtype=MODEL_DTYPE).tobytes(),
    ]
    parts += [np.ascontiguousarray(w, dtype=MODEL_DTYPE).tobytes() for ws in model.weights for w in ws]
    Path(path).write_bytes(b"".join(parts))


def load_model(path):
    data = Path(path).read_bytes()
    if data[:4] != MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {MODEL_MAGIC!r}")
    if len(data) < 24:
        raise LengthError(f"{path}: truncated header")
    n_scales, n_layers, n_bands, hidden, n_classes = (
        int(v) for v in np.frombuffer(data, dtype=HEADER_DTYPE, count=5, offset=4)
    )
    if min(n_scales, n_layers, n_bands, hidden, n_classes) < 1:
        raise FormatError(f"{path}: zero dimension in header")
    dims = layer_dims(n_bands, n_classes, n_layers, hidden)
    n_weights = n_scales * sum(a * b for a, b in zip(dims[:-1], dims[1:]))
    expected = 24 + 8 * (n_layers + n_weights)
    if len(data) != expected:
        raise LengthError(f"{path}: {len(data)} bytes, header implies {expected}")
    values = np.frombuffer(data, dtype=MODEL_DTYPE, offset=24)
    alpha, beta = float(values[0]), tuple(float(b) for b in values[1:n_layers])
    pos = n_layers
    weights = []
    for _ in range(n_scales):
        layers = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            layers.append(values[pos : pos + fan_in * fan_out].reshape(fan_in, fan_out).copy())
            pos += fan_in * fan_out
        weights.append(layers)
    log.debug(
        "%s: %d scale(s), %d layer(s), %d bands -> %d classes", path, n_scales, n_layers, n_bands, n_classes
    )
    return Model(weights, alpha, beta, hidden)
