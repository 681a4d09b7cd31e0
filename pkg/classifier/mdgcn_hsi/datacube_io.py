"""Hyperspectral cube / label-map codecs, standardization and label sampling.

Binary layouts (all little-endian):

    cube    "HSIC" | H, W, B  (uint32) | H*W*B float32, band-sequential
    labels  "HSIL" | H, W     (uint32) | H*W   uint16, row-major

Split files are plain text, one ``row,col,class,role`` record per line with
role ``train`` or ``val``.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import (
    CUBE_DTYPE,
    CUBE_MAGIC,
    DEFAULT_PER_CLASS,
    DEFAULT_SEED,
    DEFAULT_VAL_FRACTION,
    HEADER_DTYPE,
    LABELS_DTYPE,
    LABELS_MAGIC,
    SPLIT_ROLES,
)
from .errors import (
    DataError,
    FormatError,
    LengthError,
    ParameterError,
    SamplingError,
    ShapeError,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DataCube:
    """H x W x B grid of intensities, indexed ``values[row, col, band]``."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 3 or min(self.values.shape) < 1:
            raise ShapeError(f"cube must be H x W x B with every side >= 1, got {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise DataError("cube contains non-finite values")

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def bands(self):
        return self.values.shape[2]

    @property
    def shape(self):
        return self.values.shape

    def pixels(self):
        """Spectra as an (H*W) x B matrix in row-major pixel order."""
        return self.values.reshape(-1, self.bands)


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel class index, 0 = unlabeled, 1..C = classes."""

    labels: np.ndarray

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    @property
    def n_classes(self):
        return int(self.labels.max()) if self.labels.size else 0


@dataclass(frozen=True)
class SplitSpec:
    """Labeled pixels drawn for training and validation, as (row, col, class)."""

    train_pixels: list = field(default_factory=list)
    validation_pixels: list = field(default_factory=list)
    seed: int = DEFAULT_SEED

    def all_pixels(self):
        return [*self.train_pixels, *self.validation_pixels]


# ── Binary helpers ────────────────────────────────────────────────────


def _read_header(path, magic, n_dims):
    data = Path(path).read_bytes()
    if data[:4] != magic:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {magic!r}")
    header_end = 4 + 4 * n_dims
    if len(data) < header_end:
        raise LengthError(f"{path}: truncated header")
    dims = tuple(int(d) for d in np.frombuffer(data, dtype=HEADER_DTYPE, count=n_dims, offset=4))
    return dims, data[header_end:]


def _payload(path, payload, dtype, count):
    itemsize = np.dtype(dtype).itemsize
    if len(payload) != count * itemsize:
        raise LengthError(
            f"{path}: payload holds {len(payload) // itemsize} values, header declares {count}"
        )
    return np.frombuffer(payload, dtype=dtype, count=count)


def load_cube(path):
    """Read an HSIC file into a :class:`DataCube` (float32 values, as stored)."""
    (height, width, bands), payload = _read_header(path, CUBE_MAGIC, 3)
    flat = _payload(path, payload, CUBE_DTYPE, height * width * bands)
    if not np.isfinite(flat).all():
        raise DataError(f"{path}: cube contains non-finite values")
    values = flat.reshape(bands, height, width).transpose(1, 2, 0).astype(np.float32)
    return DataCube(values)


def save_cube(cube, path):
    values = np.ascontiguousarray(cube.values.transpose(2, 0, 1), dtype=CUBE_DTYPE)
    header = np.array([cube.height, cube.width, cube.bands], dtype=HEADER_DTYPE)
    Path(path).write_bytes(CUBE_MAGIC + header.tobytes() + values.tobytes())


def load_labels(path, cube=None):
    """Read an HSIL file. With ``cube`` given, its H x W must match."""
    (height, width), payload = _read_header(path, LABELS_MAGIC, 2)
    flat = _payload(path, payload, LABELS_DTYPE, height * width)
    labels = flat.reshape(height, width).astype(np.int64)
    if cube is not None and (height, width) != (cube.height, cube.width):
        raise ShapeError(
            f"{path}: label grid is {height}x{width}, cube is {cube.height}x{cube.width}"
        )
    present = set(np.unique(labels[labels > 0]).tolist())
    missing = set(range(1, int(labels.max(initial=0)) + 1)) - present
    if missing:
        log.warning("%s: class indices are not contiguous, missing %s", path, sorted(missing))
    return LabelMap(labels)


def save_labels(label_map, path):
    labels = np.ascontiguousarray(label_map.labels, dtype=LABELS_DTYPE)
    header = np.array([label_map.height, label_map.width], dtype=HEADER_DTYPE)
    Path(path).write_bytes(LABELS_MAGIC + header.tobytes() + labels.tobytes())


# ── Preprocessing ─────────────────────────────────────────────────────


def standardize(cube):
    """Per-band z-score over all pixels (population std). Constant bands -> 0."""
    values = cube.values.astype(np.float64)
    mean = values.mean(axis=(0, 1))
    std = values.std(axis=(0, 1))
    centered = values - mean
    safe = np.where(std > 0, std, 1.0)
    out = np.where(std > 0, centered / safe, 0.0)
    return DataCube(out)


# ── Label sampling ────────────────────────────────────────────────────


def _draw_count(available, per_class):
    # Classes short of per_class get half of it (30 -> 15), capped by what exists.
    wanted = per_class if available >= per_class else math.ceil(per_class / 2)
    return min(wanted, available)


def _validation_count(drawn, val_fraction):
    n_val = max(1, int(math.floor(drawn * val_fraction + 0.5)))
    return min(n_val, drawn - 1)


def sample_training_pixels(
    labels, per_class=DEFAULT_PER_CLASS, val_fraction=DEFAULT_VAL_FRACTION, seed=DEFAULT_SEED
):
    """Draw labeled pixels per class and split them into train / validation.

    Each class contributes ``per_class`` pixels, or ``ceil(per_class / 2)``
    when fewer than ``per_class`` are labeled. ``val_fraction`` of the drawn
    pixels (at least one) go to validation, the rest (at least one) to
    training. Pixels are drawn without replacement from the row-major list
    of the class's pixels, so the result depends only on the arguments.
    """
    if per_class < 2:
        raise ParameterError(f"per_class must be >= 2, got {per_class}")
    if not 0.0 < val_fraction < 1.0:
        raise ParameterError(f"val_fraction must be in (0, 1), got {val_fraction}")
    n_classes = labels.n_classes
    if n_classes == 0:
        raise SamplingError("label map has no labeled pixels")

    rng = np.random.default_rng(seed)
    flat = labels.labels.ravel()
    train, val = [], []
    for cls in range(1, n_classes + 1):
        idx = np.flatnonzero(flat == cls)
        if idx.size < 2:
            raise SamplingError(f"class {cls} has {idx.size} labeled pixels, need at least 2")
        drawn = rng.choice(idx, size=_draw_count(idx.size, per_class), replace=False)
        n_val = _validation_count(drawn.size, val_fraction)
        rows, cols = np.unravel_index(drawn, labels.labels.shape)
        records = [(int(r), int(c), cls) for r, c in zip(rows, cols)]
        train.extend(records[: len(records) - n_val])
        val.extend(records[len(records) - n_val :])
    return SplitSpec(train, val, seed)


# ── Split files ───────────────────────────────────────────────────────


def write_split(split, path):
    lines = [f"{r},{c},{k},train" for r, c, k in split.train_pixels]
    lines += [f"{r},{c},{k},val" for r, c, k in split.validation_pixels]
    Path(path).write_text("\n".join(lines) + "\n")


def read_split(path, labels=None, seed=DEFAULT_SEED):
    """Parse a split file; with ``labels`` given, every pixel must be labeled there."""
    train, val = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4 or parts[3] not in SPLIT_ROLES:
            raise FormatError(f"{path}:{lineno}: expected 'row,col,class,role', got {line!r}")
        try:
            row, col, cls = (int(p) for p in parts[:3])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-integer field in {line!r}") from None
        (train if parts[3] == "train" else val).append((row, col, cls))

    if {(r, c) for r, c, _ in train} & {(r, c) for r, c, _ in val}:
        raise FormatError(f"{path}: train and validation pixels overlap")
    if labels is not None:
        for row, col, cls in [*train, *val]:
            if not (0 <= row < labels.height and 0 <= col < labels.width):
                raise ShapeError(f"{path}: pixel ({row},{col}) lies outside the image")
            if labels.labels[row, col] != cls or cls == 0:
                raise FormatError(
                    f"{path}: pixel ({row},{col}) listed as class {cls}, "
                    f"label map has {labels.labels[row, col]}"
                )
    return SplitSpec(train, val, seed)
