"""Pixel predictions, accuracy metrics and rendered classification maps."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EvaluationError, PaletteError, ShapeError
from .ppm import encode_ppm


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Confusion counts (rows = truth, cols = predicted) and derived scores."""

    confusion: np.ndarray
    per_class: np.ndarray
    oa: float
    aa: float
    kappa: float

    @property
    def n_evaluated(self):
        return int(self.confusion.sum())

    def to_dict(self):
        # Classes absent from the test set have no accuracy; JSON gets null.
        return {
            "confusion": self.confusion.tolist(),
            "per_class": [None if np.isnan(v) else float(v) for v in self.per_class],
            "oa": self.oa,
            "aa": self.aa,
            "kappa": self.kappa,
        }


def predict_pixels(trace, seg):
    """Argmax class (1-based, smallest index on ties) of each superpixel, painted onto its pixels.

    ``trace`` may be a ForwardTrace or an M x C probability matrix.
    """
    probs = getattr(trace, "probs", trace)
    if probs.shape[0] != seg.n_segments:
        raise ShapeError(f"{probs.shape[0]} node predictions for {seg.n_segments} superpixels")
    node_class = np.argmax(probs, axis=1) + 1
    return node_class[seg.assignment]


def confusion_matrix(truth, pred, n_classes):
    """C x C counts for 1-based ``truth`` / ``pred`` vectors."""
    conf = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(conf, (truth - 1, pred - 1), 1)
    return conf


def scores(conf):
    """``(per_class, oa, aa, kappa)`` from a confusion matrix."""
    conf = np.asarray(conf, dtype=np.int64)
    total = conf.sum()
    if total == 0:
        raise EvaluationError("no test pixels to evaluate")
    rows = conf.sum(axis=1)
    cols = conf.sum(axis=0)
    diag = np.diag(conf)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(rows > 0, diag / np.where(rows > 0, rows, 1), np.nan)
    oa = float(diag.sum() / total)
    aa = float(np.nanmean(per_class))
    p_e = float((rows * cols).sum() / (total * total))
    kappa = 1.0 if p_e == 1.0 else (oa - p_e) / (1.0 - p_e)
    return per_class, oa, aa, float(kappa)


def evaluate(pred, truth, exclude, n_classes=None):
    """Score ``pred`` against ``truth`` on every labeled pixel outside ``exclude``.

    ``exclude`` is the SplitSpec used for training; its pixels never count.
    """
    pred = np.asarray(pred)
    if pred.shape != truth.labels.shape:
        raise ShapeError(f"prediction is {pred.shape}, ground truth is {truth.labels.shape}")
    n_classes = n_classes or truth.n_classes
    mask = truth.labels > 0
    for row, col, _ in exclude.all_pixels():
        mask[row, col] = False
    if not mask.any():
        raise EvaluationError("no test pixels left after excluding unlabeled and split pixels")

    t = truth.labels[mask]
    p = pred[mask]
    if t.max() > n_classes or p.min() < 1 or p.max() > n_classes:
        raise EvaluationError(f"labels outside 1..{n_classes} among the test pixels")
    conf = confusion_matrix(t, p, n_classes)
    per_class, oa, aa, kappa = scores(conf)
    return EvalReport(conf, per_class, oa, aa, kappa)


def write_report(report, path):
    with open(path, "w") as f:
        json.dump(report.to_dict(), f, indent=2)


def render_map(pred, palette):
    """PPM bytes colouring each pixel by ``palette[class]``."""
    pred = np.asarray(pred, dtype=np.int64)
    present = np.unique(pred)
    missing = [int(c) for c in present if int(c) not in palette]
    if missing:
        raise PaletteError(f"palette has no colour for class(es) {missing}")
    lut = np.zeros((int(present.max(initial=0)) + 1, 3), dtype=np.uint8)
    for cls, rgb in palette.items():
        if cls < lut.shape[0]:
            lut[cls] = rgb
    return encode_ppm(lut[pred])


def write_map(pred, palette, path):
    Path(path).write_bytes(render_map(pred, palette))
