"""Tests for flag-value parsing: scale lists, variants and palettes."""

import pytest
from mdgcn_hsi.cmdline import (
    default_palette,
    format_palette,
    format_scales,
    format_variant,
    parse_counts,
    parse_palette,
    parse_scales,
    parse_variant,
    read_palette,
)
from mdgcn_hsi.errors import PaletteError, ParameterError

# ── Scales / counts ───────────────────────────────────────────────────


def test_parse_scales_keeps_order():
    assert parse_scales("3, 1,2") == (3, 1, 2)


def test_parse_single_scale():
    assert parse_scales("2") == (2,)


@pytest.mark.parametrize("text", ["", " , ", "1,x", "0,1", "-1", "1,2,1"])
def test_parse_scales_rejects(text):
    with pytest.raises(ParameterError):
        parse_scales(text)


def test_counts_need_at_least_two():
    assert parse_counts("2,5,30") == (2, 5, 30)
    with pytest.raises(ParameterError):
        parse_counts("1,5")


def test_format_scales():
    assert format_scales((1, 2, 3)) == "1,2,3"
    assert parse_scales(format_scales((4, 1))) == (4, 1)


# ── Variants ──────────────────────────────────────────────────────────


@pytest.mark.parametrize(
    "text, expected",
    [
        ("mdgcn", ("mdgcn", None)),
        ("MDGCN", ("mdgcn", None)),
        ("dynamic", ("mdgcn", None)),
        ("fixed-graph", ("fixed-graph", None)),
        ("fixed_graph", ("fixed-graph", None)),
        ("mgcn", ("fixed-graph", None)),
        ("single-scale=2", ("single-scale", 2)),
        ("single_scale(3)", ("single-scale", 3)),
        (" single-scale = 1 ", ("single-scale", 1)),
    ],
)
def test_parse_variant(text, expected):
    assert parse_variant(text) == expected


@pytest.mark.parametrize(
    "text", ["", "gcn", "mdgcn=2", "single-scale", "single-scale=0", "single-scale=two"]
)
def test_parse_variant_rejects(text):
    with pytest.raises(ParameterError):
        parse_variant(text)


def test_format_variant():
    assert format_variant("mdgcn") == "mdgcn"
    assert format_variant("single-scale", 2) == "single-scale=2"
    assert parse_variant(format_variant("single-scale", 4)) == ("single-scale", 4)


# ── Palettes ──────────────────────────────────────────────────────────


def test_parse_palette():
    text = "# class,r,g,b\n1,255,0,0\n\n2, 0, 128, 255\n"
    assert parse_palette(text) == {0: (0, 0, 0), 1: (255, 0, 0), 2: (0, 128, 255)}


def test_palette_may_recolour_background():
    assert parse_palette("0,9,9,9")[0] == (9, 9, 9)


@pytest.mark.parametrize("line", ["1,2,3", "1,2,3,x", "1,256,0,0", "-1,0,0,0"])
def test_parse_palette_rejects(line):
    with pytest.raises(PaletteError, match="line 2"):
        parse_palette("1,0,0,0\n" + line)


def test_palette_file_round_trip(tmp_path):
    palette = {0: (0, 0, 0), 1: (1, 2, 3), 7: (250, 100, 0)}
    path = tmp_path / "palette.txt"
    path.write_text(format_palette(palette))
    assert read_palette(path) == palette


def test_default_palette():
    palette = default_palette(5)
    assert set(palette) == {0, 1, 2, 3, 4, 5}
    assert palette[0] == (0, 0, 0)
    colours = [palette[c] for c in range(1, 6)]
    assert len(set(colours)) == 5
    assert all(0 <= v <= 255 for rgb in colours for v in rgb)
