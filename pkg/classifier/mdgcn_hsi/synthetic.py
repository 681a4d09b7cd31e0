"""Seeded block-structured test scenes with known ground truth."""

import math

import numpy as np

from .datacube_io import DataCube, LabelMap
from .errors import ParameterError


def make_synthetic_scene(height=64, width=64, bands=16, n_classes=4, block=16, noise=0.1, seed=0):
    """Square blocks of side ``block``, each filled with one class.

    Every class gets a mean spectrum drawn from N(0, 1) per band; pixels add
    N(0, noise^2) noise. Blocks are dealt classes round-robin and then
    shuffled, so every class appears whenever there are enough blocks.
    Returns ``(DataCube, LabelMap)`` with every pixel labeled.
    """
    if min(height, width, bands, n_classes, block) < 1:
        raise ParameterError("scene dimensions, class count and block size must be >= 1")
    if noise < 0:
        raise ParameterError(f"noise must be >= 0, got {noise}")
    block_rows, block_cols = math.ceil(height / block), math.ceil(width / block)
    n_blocks = block_rows * block_cols
    if n_blocks < n_classes:
        raise ParameterError(
            f"{n_blocks} blocks cannot hold {n_classes} classes; use a smaller block size"
        )

    rng = np.random.default_rng(seed)
    block_class = rng.permutation(np.resize(np.arange(1, n_classes + 1), n_blocks))
    grid = block_class.reshape(block_rows, block_cols)
    labels = np.repeat(np.repeat(grid, block, axis=0), block, axis=1)[:height, :width]

    means = rng.standard_normal((n_classes, bands))
    values = means[labels - 1] + noise * rng.standard_normal((height, width, bands))
    return DataCube(values.astype(np.float32)), LabelMap(labels.astype(np.int64))
