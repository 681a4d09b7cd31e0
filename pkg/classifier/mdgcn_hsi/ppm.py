"""Binary PPM (P6) encode/decode for classification maps and boundary overlays."""

from pathlib import Path

import numpy as np

from .errors import FormatError


def encode_ppm(rgb):
    """Encode an H x W x 3 uint8 array as P6 bytes (maxval 255, row-major)."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise FormatError(f"PPM needs an H x W x 3 array, got shape {rgb.shape}")
    height, width = rgb.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + rgb.tobytes()


def _tokens(data, count):
    """Read ``count`` whitespace-separated header tokens, skipping # comments.

    Returns (tokens, offset of the single whitespace byte after the last one).
    """
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PPM header")
        tokens.append(data[start:pos])
    return tokens, pos


def decode_ppm(data):
    """Parse P6 bytes back into an H x W x 3 uint8 array."""
    (magic, width, height, maxval), pos = _tokens(data, 4)
    if magic != b"P6":
        raise FormatError(f"not a binary PPM: magic {magic!r}")
    width, height, maxval = int(width), int(height), int(maxval)
    if maxval != 255:
        raise FormatError(f"only 8-bit PPM is supported, maxval={maxval}")
    body = data[pos + 1 :]
    if len(body) != width * height * 3:
        raise FormatError(f"PPM body has {len(body)} bytes, expected {width * height * 3}")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3)


def write_ppm(rgb, path):
    Path(path).write_bytes(encode_ppm(rgb))


def read_ppm(path):
    return decode_ppm(Path(path).read_bytes())
