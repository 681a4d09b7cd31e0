"""SLIC superpixels over full standardized spectra, node features and seed labels.

Each superpixel becomes one graph node. Its feature is the mean spectrum of
its member pixels; its label is the majority class of the training pixels
it contains.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import ndimage, sparse

from .constants import (
    BOUNDARY_RGB,
    DEFAULT_COMPACTNESS,
    DEFAULT_PIXELS_PER_SUPERPIXEL,
    DEFAULT_SLIC_ITERS,
    GRID_TOLERANCE,
    SLIC_CONVERGENCE,
)
from .datacube_io import standardize
from .errors import InvariantError, ParameterError, ShapeError
from .ppm import write_ppm

log = logging.getLogger(__name__)

# 4-connectivity: pixels touching by an edge, not a corner.
_FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True, eq=False)
class Segmentation:
    """Total partition of the image into ``n_segments`` superpixels."""

    assignment: np.ndarray
    n_segments: int

    @property
    def shape(self):
        return self.assignment.shape

    @cached_property
    def sizes(self):
        return np.bincount(self.assignment.ravel(), minlength=self.n_segments)

    @cached_property
    def member_lists(self):
        """Row-major flat pixel indices of each superpixel."""
        flat = self.assignment.ravel()
        order = np.argsort(flat, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1])


@dataclass(frozen=True, eq=False)
class NodeFeatures:
    features: np.ndarray

    @property
    def n_nodes(self):
        return self.features.shape[0]

    @property
    def n_bands(self):
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class NodeLabels:
    """Class per superpixel, 0 = unlabeled."""

    labels: np.ndarray
    n_classes: int

    @property
    def labeled_indices(self):
        return np.flatnonzero(self.labels > 0)

    def one_hot(self):
        """M x C label matrix; unlabeled rows are all zero."""
        y = np.zeros((self.labels.size, self.n_classes))
        idx = self.labeled_indices
        y[idx, self.labels[idx] - 1] = 1.0
        return y


def default_superpixel_count(cube):
    return math.ceil(cube.height * cube.width / DEFAULT_PIXELS_PER_SUPERPIXEL)


# ── SLIC internals ────────────────────────────────────────────────────


def _grid_shape(height, width, k):
    """Rows x cols of the seed grid, with rows*cols as close to k as the image allows.

    Grids within ``GRID_TOLERANCE`` of ``k`` compete on cell squareness;
    otherwise the smallest count error wins. ``k = H*W`` gives one seed per
    pixel.
    """
    best_key, best = None, (1, 1)
    for rows in range(1, min(height, k) + 1):
        for cols in sorted({max(1, min(width, k // rows)), max(1, min(width, -(-k // rows)))}):
            err = abs(rows * cols - k) / k
            skew = round(abs(math.log(height * cols / (width * rows))), 9)
            key = (0, skew, err, rows) if err <= GRID_TOLERANCE else (1, err, skew, rows)
            if best_key is None or key < best_key:
                best_key, best = key, (rows, cols)
    return best


def _gradient(values):
    padded = np.pad(values, ((1, 1), (1, 1), (0, 0)), mode="edge")
    dy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    dx = padded[1:-1, 2:] - padded[1:-1, :-2]
    return (dy * dy).sum(axis=2) + (dx * dx).sum(axis=2)


def _seed_centers(values, k):
    height, width = values.shape[:2]
    rows, cols = _grid_shape(height, width, k)
    ys = (np.arange(rows) + 0.5) * height / rows - 0.5
    xs = (np.arange(cols) + 0.5) * width / cols - 0.5
    positions = np.array([(y, x) for y in ys for x in xs], dtype=np.float64)

    # Move each seed to the lowest-gradient pixel of its 3x3 neighbourhood,
    # never onto a pixel another seed already sits on.
    grad = _gradient(values)
    pixels = [(int(np.floor(y + 0.5)), int(np.floor(x + 0.5))) for y, x in positions]
    taken = set(pixels)
    for i, (r, c) in enumerate(pixels):
        best, best_grad = None, grad[r, c]
        for rr in range(max(0, r - 1), min(height, r + 2)):
            for cc in range(max(0, c - 1), min(width, c + 2)):
                if grad[rr, cc] < best_grad and (rr, cc) not in taken:
                    best, best_grad = (rr, cc), grad[rr, cc]
        if best is not None:
            taken.discard((r, c))
            taken.add(best)
            pixels[i] = best
            positions[i] = best
    spectra = np.array([values[r, c] for r, c in pixels])
    return positions, spectra


def _assign(values, positions, spectra, step, compactness):
    """Label every pixel with the center of lowest D within its 2S x 2S window.

    Centers are visited in index order with a strict comparison, so distance
    ties resolve to the lowest cluster index.
    """
    height, width = values.shape[:2]
    best = np.full((height, width), np.inf)
    labels = np.full((height, width), -1, dtype=np.int64)
    spatial_weight = (compactness / step) ** 2
    for i, ((cy, cx), mu) in enumerate(zip(positions, spectra)):
        y0, y1 = max(0, math.ceil(cy - step)), min(height, math.floor(cy + step) + 1)
        x0, x1 = max(0, math.ceil(cx - step)), min(width, math.floor(cx + step) + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        diff = values[y0:y1, x0:x1] - mu
        d_spec = (diff * diff).sum(axis=2)
        yy = (np.arange(y0, y1) - cy)[:, None]
        xx = (np.arange(x0, x1) - cx)[None, :]
        dist = d_spec + spatial_weight * (yy * yy + xx * xx)
        window_best = best[y0:y1, x0:x1]
        closer = dist < window_best
        window_best[closer] = dist[closer]
        labels[y0:y1, x0:x1][closer] = i

    uncovered = np.argwhere(labels < 0)
    if uncovered.size:
        # Centers drifted far enough to leave a gap; fall back to all centers.
        px = values[uncovered[:, 0], uncovered[:, 1]]
        d_spec = ((px[:, None, :] - spectra[None, :, :]) ** 2).sum(axis=2)
        d_xy = ((uncovered[:, None, :] - positions[None, :, :]) ** 2).sum(axis=2)
        labels[uncovered[:, 0], uncovered[:, 1]] = np.argmin(d_spec + spatial_weight * d_xy, axis=1)
    return labels


def _membership(flat_labels, n_clusters):
    """Sparse n_clusters x n_pixels indicator matrix."""
    n_pixels = flat_labels.size
    return sparse.csr_matrix(
        (np.ones(n_pixels), (flat_labels, np.arange(n_pixels))), shape=(n_clusters, n_pixels)
    )


def _update(values, labels, positions, spectra):
    height, width, bands = values.shape
    n = len(positions)
    members = _membership(labels.ravel(), n)
    counts = np.asarray(members.sum(axis=1)).ravel()
    rows, cols = np.indices((height, width))
    coords = np.column_stack([rows.ravel(), cols.ravel()]).astype(np.float64)
    nonempty = counts > 0
    new_positions = positions.copy()
    new_spectra = spectra.copy()
    new_positions[nonempty] = (members @ coords)[nonempty] / counts[nonempty, None]
    new_spectra[nonempty] = (members @ values.reshape(-1, bands))[nonempty] / counts[nonempty, None]
    shift = np.sqrt(((new_positions - positions) ** 2).sum(axis=1)).max(initial=0.0)
    return new_positions, new_spectra, shift


def _regions(labels):
    """Split every cluster into its 4-connected pieces.

    Returns the region map, the cluster of each piece and whether the piece
    is its cluster's largest, the one that keeps the label.
    """
    regions = np.zeros(labels.shape, dtype=np.int64)
    cluster, kept = [], []
    for lab, box in enumerate(ndimage.find_objects(labels + 1)):
        if box is None:
            continue
        mask = labels[box] == lab
        comp, n_comp = ndimage.label(mask, structure=_FOUR_CONNECTED)
        keep = int(np.argmax(np.bincount(comp.ravel())[1:])) + 1
        regions[box][mask] = comp[mask] + len(cluster) - 1
        cluster += [lab] * n_comp
        kept += [c == keep for c in range(1, n_comp + 1)]
    return regions, np.array(cluster, dtype=np.int64), np.array(kept, dtype=bool)


def _touching_pairs(a):
    """Unique (i, j), i < j, of labels sharing a 4-connected pixel edge."""
    pairs = np.concatenate(
        [
            np.column_stack([a[:, :-1].ravel(), a[:, 1:].ravel()]),
            np.column_stack([a[:-1, :].ravel(), a[1:, :].ravel()]),
        ]
    )
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    return np.unique(np.sort(pairs, axis=1), axis=0)


def _enforce_connectivity(labels, values):
    """Keep each cluster's largest 4-connected piece, merge every other piece.

    Each orphan piece is merged on its own into the touching region with the
    closest mean spectrum, cheapest merge first, and only into a region that
    already belongs to a kept piece. Equal costs go to the larger region,
    then the lower region index.
    """
    regions, cluster, kept = _regions(labels)
    owner = np.where(kept, cluster, -1)
    if not kept.all():
        n_regions = cluster.size
        members = _membership(regions.ravel(), n_regions)
        sizes = np.asarray(members.sum(axis=1)).ravel()
        means = (members @ values.reshape(-1, values.shape[2])) / sizes[:, None]
        neighbours = [[] for _ in range(n_regions)]
        for i, j in _touching_pairs(regions).tolist():
            neighbours[i].append(j)
            neighbours[j].append(i)

        def merge(orphan, target):
            d = means[orphan] - means[target]
            return (float(d @ d), -int(sizes[target]), target, orphan)

        heap = [merge(r, t) for r in np.flatnonzero(~kept).tolist() for t in neighbours[r] if kept[t]]
        heapq.heapify(heap)
        while heap:
            _, _, target, orphan = heapq.heappop(heap)
            if owner[orphan] >= 0:
                continue
            owner[orphan] = owner[target]
            for r in neighbours[orphan]:
                if owner[r] < 0:
                    heapq.heappush(heap, merge(r, orphan))
        if (owner < 0).any():
            raise InvariantError("orphan region without a path to a kept superpixel")

    _, relabeled = np.unique(owner[regions], return_inverse=True)
    return relabeled.reshape(labels.shape)


# ── Public operations ─────────────────────────────────────────────────


def slic_segment(cube, k, compactness=DEFAULT_COMPACTNESS, iters=DEFAULT_SLIC_ITERS):
    """Segment ``cube`` into roughly ``k`` compact, 4-connected superpixels.

    Distance is ``D = sqrt(d_spec^2 + m^2 (d_xy / S)^2)`` with
    ``S = sqrt(H*W / k)`` and ``d_spec`` the Euclidean distance between
    standardized spectra. Iteration stops after ``iters`` rounds or once no
    center moves more than ``1e-4 * S``. Pieces cut off from their cluster
    then join the touching superpixel with the closest mean spectrum.
    """
    n_pixels = cube.height * cube.width
    if not 1 <= k <= n_pixels:
        raise ParameterError(f"superpixel count k must be in [1, {n_pixels}], got {k}")
    if compactness <= 0:
        raise ParameterError(f"compactness m must be > 0, got {compactness}")
    if iters < 1:
        raise ParameterError(f"SLIC iterations must be >= 1, got {iters}")

    values = standardize(cube).values
    step = math.sqrt(n_pixels / k)
    positions, spectra = _seed_centers(values, k)
    labels = None
    for it in range(iters):
        labels = _assign(values, positions, spectra, step, compactness)
        positions, spectra, shift = _update(values, labels, positions, spectra)
        if shift < SLIC_CONVERGENCE * step:
            log.debug("SLIC converged after %d iterations", it + 1)
            break

    assignment = _enforce_connectivity(labels, values)
    seg = Segmentation(assignment, int(assignment.max()) + 1)
    log.info("SLIC: %d superpixels for k=%d on a %dx%d cube", seg.n_segments, k, *seg.shape)
    return seg


def superpixel_features(cube, seg):
    """Mean spectrum of each superpixel, as an M x B matrix."""
    if seg.shape != (cube.height, cube.width):
        raise ShapeError(f"segmentation {seg.shape} does not match cube {cube.shape[:2]}")
    if (seg.sizes == 0).any():
        raise InvariantError(f"empty superpixels: {np.flatnonzero(seg.sizes == 0).tolist()}")
    members = _membership(seg.assignment.ravel(), seg.n_segments)
    sums = members @ cube.pixels().astype(np.float64)
    return NodeFeatures(sums / seg.sizes[:, None])


def base_adjacency(seg):
    """Superpixels sharing at least one 4-connected pixel edge, as a list of sets."""
    neighbors = [set() for _ in range(seg.n_segments)]
    for i, j in _touching_pairs(seg.assignment).tolist():
        neighbors[i].add(j)
        neighbors[j].add(i)
    return neighbors


def _vote(seg, pixels, n_classes):
    counts = np.zeros((seg.n_segments, n_classes + 1), dtype=np.int64)
    height, width = seg.shape
    for row, col, cls in pixels:
        if not 1 <= cls <= n_classes:
            raise ParameterError(f"pixel ({row},{col}) has class {cls}, expected 1..{n_classes}")
        if not (0 <= row < height and 0 <= col < width):
            raise ShapeError(f"pixel ({row},{col}) lies outside the {height}x{width} image")
        counts[seg.assignment[row, col], cls] += 1
    counts[:, 0] = 0
    # argmax picks the first maximum, i.e. the smallest class index on ties.
    labels = np.argmax(counts, axis=1)
    labels[counts.sum(axis=1) == 0] = 0
    return labels


def project_labels(seg, split, n_classes):
    """Majority-vote the split's pixels onto superpixels.

    Returns ``(train, validation)`` :class:`NodeLabels`. A superpixel holding
    both training and validation pixels stays a training node only.
    """
    train = _vote(seg, split.train_pixels, n_classes)
    val = _vote(seg, split.validation_pixels, n_classes)
    overlap = (train > 0) & (val > 0)
    if overlap.any():
        log.warning(
            "%d superpixel(s) hold both training and validation pixels; "
            "they are used for training only",
            int(overlap.sum()),
        )
        val[overlap] = 0
    return NodeLabels(train, n_classes), NodeLabels(val, n_classes)


# ── Export ────────────────────────────────────────────────────────────


def write_segmentation(seg, path):
    rows, cols = np.indices(seg.shape)
    lines = [
        f"{r},{c},{s}" for r, c, s in zip(rows.ravel(), cols.ravel(), seg.assignment.ravel())
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def boundary_mask(seg):
    """True on pixels whose right or lower neighbour lies in another superpixel."""
    a = seg.assignment
    mask = np.zeros(a.shape, dtype=bool)
    mask[:, :-1] |= a[:, :-1] != a[:, 1:]
    mask[:-1, :] |= a[:-1, :] != a[1:, :]
    return mask


def render_boundaries(cube, seg):
    """Grey band-mean image with superpixel boundaries drawn in red."""
    grey = cube.values.astype(np.float64).mean(axis=2)
    lo, hi = grey.min(), grey.max()
    scaled = np.zeros_like(grey) if hi == lo else (grey - lo) / (hi - lo) * 255.0
    rgb = np.repeat(np.round(scaled).astype(np.uint8)[:, :, None], 3, axis=2)
    rgb[boundary_mask(seg)] = BOUNDARY_RGB
    return rgb


def write_boundary_overlay(cube, seg, path):
    write_ppm(render_boundaries(cube, seg), path)
