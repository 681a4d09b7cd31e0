"""Superpixel graphs: Gaussian-weighted adjacency over s-hop receptive fields.

Neighbor sets never contain the node itself; self-loops only appear through
the ``A + I`` of :func:`normalize_adjacency`. Storage is dense: after
superpixel segmentation M is in the hundreds to low thousands.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import DEFAULT_GAMMA, SYMMETRY_TOL
from .errors import ContractError, ParameterError


@dataclass(frozen=True, eq=False)
class ScaleGraph:
    scale: int
    neighbor_sets: list
    a_init: np.ndarray
    a_hat_init: np.ndarray
    gamma: float

    @property
    def n_nodes(self):
        return self.a_init.shape[0]


def expand_receptive_field(base, s):
    """s-hop neighbor sets: ``R_s(i) = R_{s-1}(i) ∪ R_1(R_{s-1}(i))`` minus ``i``."""
    if s < 1:
        raise ParameterError(f"hop count must be >= 1, got {s}")
    field = [set(n) for n in base]
    for _ in range(s - 1):
        grown = []
        for i, reach in enumerate(field):
            nxt = set(reach)
            for j in reach:
                nxt |= base[j]
            nxt.discard(i)
            grown.append(nxt)
        field = grown
    return field


def _neighbor_mask(neighbors):
    n = len(neighbors)
    mask = np.zeros((n, n), dtype=bool)
    for i, reach in enumerate(neighbors):
        if reach:
            mask[i, sorted(reach)] = True
    mask |= mask.T
    np.fill_diagonal(mask, False)
    return mask


def initial_adjacency(features, neighbors, gamma=DEFAULT_GAMMA):
    """``A[i, j] = exp(-gamma * ||x_i - x_j||^2)`` on neighbor pairs, else 0."""
    if gamma <= 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    x = features.features
    if len(neighbors) != x.shape[0]:
        raise ContractError(f"{len(neighbors)} neighbor sets for {x.shape[0]} nodes")
    rows, cols = np.nonzero(_neighbor_mask(neighbors))
    diff = x[rows] - x[cols]
    a = np.zeros((x.shape[0], x.shape[0]))
    a[rows, cols] = np.exp(-gamma * (diff * diff).sum(axis=1))
    return a


def check_symmetric(a, name="adjacency"):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if not np.allclose(a, a.T, rtol=0.0, atol=SYMMETRY_TOL * scale):
        raise ContractError(f"{name} is not symmetric")


def normalize_adjacency(a):
    """Renormalization trick: ``D~^(-1/2) (A + I) D~^(-1/2)`` with ``D~ = rowsum(A + I)``."""
    check_symmetric(a)
    if (a < 0).any():
        raise ContractError("adjacency has negative entries")
    a_tilde = a + np.eye(a.shape[0])
    d_inv_sqrt = 1.0 / np.sqrt(a_tilde.sum(axis=1))
    out = d_inv_sqrt[:, None] * a_tilde * d_inv_sqrt[None, :]
    return 0.5 * (out + out.T)


def build_scale_graph(features, base, scale, gamma=DEFAULT_GAMMA):
    neighbors = expand_receptive_field(base, scale)
    a_init = initial_adjacency(features, neighbors, gamma)
    return ScaleGraph(scale, neighbors, a_init, normalize_adjacency(a_init), gamma)


def build_scale_graphs(features, base, scales, gamma=DEFAULT_GAMMA):
    return [build_scale_graph(features, base, s, gamma) for s in scales]


def write_graph(graph, path):
    """Edge list ``i,j,weight`` (i < j) under a ``M,scale,gamma`` header."""
    lines = [f"{graph.n_nodes},{graph.scale},{float(graph.gamma)!r}"]
    rows, cols = np.nonzero(np.triu(graph.a_init, k=1))
    lines += [f"{i},{j},{float(graph.a_init[i, j])!r}" for i, j in zip(rows.tolist(), cols.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")
