"""Parse and format helpers for flag values: scale lists, variants, palettes.

Kept free of numpy-heavy imports so the run-config and argparse layers can
canonicalise user input before anything expensive runs.
"""

import colorsys
from pathlib import Path

from .constants import VARIANT_FIXED_GRAPH, VARIANT_MDGCN, VARIANT_SINGLE_SCALE
from .errors import PaletteError, ParameterError

# Every spelling accepted on the command line or in a saved config, mapped to
# the canonical variant kind. Lower-cased lookup.
_VARIANT_ALIASES = {
    "mdgcn": VARIANT_MDGCN,
    "dynamic": VARIANT_MDGCN,
    "fixed-graph": VARIANT_FIXED_GRAPH,
    "fixed_graph": VARIANT_FIXED_GRAPH,
    "mgcn": VARIANT_FIXED_GRAPH,
    "single-scale": VARIANT_SINGLE_SCALE,
    "single_scale": VARIANT_SINGLE_SCALE,
}


def _parse_int_list(text, what, minimum):
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ParameterError(f"at least one {what} is required")
    try:
        values = tuple(int(p) for p in parts)
    except ValueError:
        raise ParameterError(f"{what}s must be integers, got {text!r}") from None
    if min(values) < minimum:
        raise ParameterError(f"{what}s must be >= {minimum}, got {text!r}")
    if len(set(values)) != len(values):
        raise ParameterError(f"duplicate {what} in {text!r}")
    return values


def parse_scales(text):
    """``"1,2,3"`` -> ``(1, 2, 3)``. Duplicates are rejected, order is kept."""
    return _parse_int_list(text, "scale", 1)


def parse_counts(text):
    """Labeled-examples-per-class list for sweeps, e.g. ``"5,10,15"``."""
    return _parse_int_list(text, "count", 2)


def format_scales(scales):
    return ",".join(str(s) for s in scales)


def parse_variant(text):
    """Parse a variant string into ``(kind, scale)``.

    Accepts ``mdgcn``, ``fixed-graph`` (alias ``mgcn``) and
    ``single-scale=S`` (also ``single_scale(S)``). ``scale`` is None except
    for the single-scale variant.
    """
    raw = str(text or "").strip().lower()
    if raw.endswith(")") and "(" in raw:
        raw = raw[:-1].replace("(", "=", 1)
    name, sep, arg = raw.partition("=")
    kind = _VARIANT_ALIASES.get(name.strip())
    if kind is None:
        raise ParameterError(f"unknown variant {text!r}")
    if kind != VARIANT_SINGLE_SCALE:
        if sep:
            raise ParameterError(f"variant {name!r} takes no argument")
        return kind, None
    try:
        scale = int(arg)
    except ValueError:
        raise ParameterError(f"single-scale variant needs a hop count, got {text!r}") from None
    if scale < 1:
        raise ParameterError(f"single-scale hop count must be >= 1, got {scale}")
    return kind, scale


def format_variant(kind, scale=None):
    return f"{kind}={scale}" if kind == VARIANT_SINGLE_SCALE else kind


# ── Palettes ──────────────────────────────────────────────────────────


def default_palette(n_classes):
    """Class 0 black, classes 1..C spread evenly around the hue circle."""
    palette = {0: (0, 0, 0)}
    for cls in range(1, n_classes + 1):
        r, g, b = colorsys.hsv_to_rgb((cls - 1) / max(n_classes, 1), 0.85, 0.95)
        palette[cls] = (round(r * 255), round(g * 255), round(b * 255))
    return palette


def parse_palette(text):
    """Parse ``class,r,g,b`` lines into ``{class: (r, g, b)}``. Class 0 defaults to black."""
    palette = {0: (0, 0, 0)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            cls, r, g, b = (int(p) for p in parts)
        except ValueError:
            raise PaletteError(f"line {lineno}: expected 'class,r,g,b', got {line!r}") from None
        if cls < 0 or not all(0 <= v <= 255 for v in (r, g, b)):
            raise PaletteError(f"line {lineno}: class or colour out of range in {line!r}")
        palette[cls] = (r, g, b)
    return palette


def read_palette(path):
    return parse_palette(Path(path).read_text())


def format_palette(palette):
    return "".join(f"{cls},{r},{g},{b}\n" for cls, (r, g, b) in sorted(palette.items()))
