"""8-bit raster frames and binary netpbm (PGM/PPM) reading and writing."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, RasterFormatError


@dataclass(frozen=True)
class Raster:
    """A height x width grid of 8-bit samples, 1 channel (gray) or 3 (RGB).

    `pixels` is uint8 with shape (h, w) for grayscale or (h, w, 3) for color.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if not isinstance(px, np.ndarray) or px.dtype != np.uint8:
            raise InvalidInputError("raster samples must be a uint8 ndarray")
        ok_shape = px.ndim == 2 or (px.ndim == 3 and px.shape[2] == 3)
        if not ok_shape:
            raise InvalidInputError(f"raster shape must be (h, w) or (h, w, 3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidInputError("raster must be at least 1x1")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3


def _read_header_tokens(data: bytes, count: int, start: int) -> tuple[list[bytes], int]:
    """Pull `count` whitespace-separated tokens, honoring '#' comments."""
    tokens: list[bytes] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise RasterFormatError("truncated netpbm header")
        tokens.append(data[i:j])
        i = j
    return tokens, i


def read_netpbm(path: str | Path) -> Raster:
    """Read a binary PGM (P5) or PPM (P6) file with maxval 255."""
    data = Path(path).read_bytes()
    tokens, pos = _read_header_tokens(data, 4, 0)
    magic, w_tok, h_tok, max_tok = tokens
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise RasterFormatError(f"unsupported netpbm magic {magic!r} (want P5 or P6)")
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError as exc:
        raise RasterFormatError(f"non-numeric netpbm header field: {exc}") from exc
    if width < 1 or height < 1:
        raise RasterFormatError(f"bad netpbm dimensions {width}x{height}")
    if maxval != 255:
        raise RasterFormatError(f"only maxval 255 supported, got {maxval}")
    # Exactly one whitespace byte separates the header from the raster.
    body = data[pos + 1 :]
    expected = width * height * channels
    if len(body) < expected:
        raise RasterFormatError(f"netpbm body truncated: {len(body)} < {expected} bytes")
    flat = np.frombuffer(body[:expected], dtype=np.uint8)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return Raster(flat.reshape(shape).copy())


def write_netpbm(raster: Raster, path: str | Path) -> None:
    """Write a Raster as binary PGM (1 channel) or PPM (3 channels), maxval 255."""
    magic = b"P5" if raster.channels == 1 else b"P6"
    header = b"%s\n%d %d\n255\n" % (magic, raster.width, raster.height)
    Path(path).write_bytes(header + raster.pixels.tobytes())


def frame_filename(frame: int, channels: int = 1) -> str:
    """Canonical on-disk name for a frame image."""
    ext = "pgm" if channels == 1 else "ppm"
    return f"frame_{frame:06d}.{ext}"
