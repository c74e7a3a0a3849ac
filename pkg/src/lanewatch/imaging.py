"""Frame preprocessing: grayscale, blur, adaptive threshold, edge extraction, ROI.

Every stage is a pure function over immutable :class:`~lanewatch.raster.Raster`
values and is fully deterministic: identical input and parameters produce
bit-identical output. Borders are handled by edge replication throughout.

Conventions pinned here so downstream fixtures stay stable:

* grayscale uses the ITU-R 601 luma weights 0.299/0.587/0.114;
* edge magnitude is the L1 norm |gx| + |gy| of the 3x3 Sobel responses
  (max 2040 on 8-bit input, thresholds are expressed on that scale);
* gradient direction is quantized into four sectors split at 22.5 degrees;
* non-maximum suppression keeps a pixel iff its magnitude is >= the
  neighbor on the negative side of its sector and strictly > the neighbor
  on the positive side (so a tied 2-px ridge keeps exactly one pixel, the
  one with the larger coordinate); off-image neighbors count as magnitude 0;
* ROI membership tests the pixel center (x+0.5, y+0.5) with the even-odd rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .errors import InvalidConfigError, InvalidInputError
from .raster import Raster

GRAY_WEIGHTS = (0.299, 0.587, 0.114)

# Maximum L1 Sobel magnitude reachable per axis on 8-bit input.
MAX_CANNY_THRESHOLD = 255 * 4

_TAN_22_5 = math.tan(math.pi / 8.0)


def to_grayscale(frame: Raster) -> Raster:
    """Collapse a 3-channel frame to single-channel luma.

    Each output sample is round(0.299*R + 0.587*G + 0.114*B).
    """
    if frame.channels != 3:
        raise InvalidInputError(f"to_grayscale needs a 3-channel frame, got {frame.channels}")
    px = frame.pixels.astype(np.float64)
    wr, wg, wb = GRAY_WEIGHTS
    gray = wr * px[:, :, 0] + wg * px[:, :, 1] + wb * px[:, :, 2]
    return Raster(np.round(gray).clip(0, 255).astype(np.uint8))


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """1D Gaussian taps, normalized to sum exactly (in float64) to 1."""
    radius = size // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def gaussian_blur(img: Raster, kernel_size: int = 5, sigma: float = 1.4) -> Raster:
    """Separable Gaussian smoothing with edge-replicated borders.

    The intermediate result stays in float64 between the two passes and is
    rounded once at the end, so constant images are preserved exactly.
    """
    if img.channels != 1:
        raise InvalidInputError("gaussian_blur operates on single-channel rasters")
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise InvalidConfigError(f"kernel_size must be odd and >= 3, got {kernel_size}")
    if not sigma > 0:
        raise InvalidConfigError(f"sigma must be > 0, got {sigma}")
    taps = gaussian_kernel(kernel_size, sigma)
    out = img.pixels.astype(np.float64)
    out = ndimage.correlate1d(out, taps, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, taps, axis=1, mode="nearest")
    return Raster(np.round(out).clip(0, 255).astype(np.uint8))


def adaptive_threshold(img: Raster, block: int = 15, c: int = 5) -> Raster:
    """Local-mean binarization: 255 where value > (block-neighborhood mean - c).

    The comparison is done in exact integer arithmetic
    (value * block^2 > window_sum - c * block^2), so results match a
    per-pixel reference computation bit for bit.
    """
    if img.channels != 1:
        raise InvalidInputError("adaptive_threshold operates on single-channel rasters")
    if block < 3 or block % 2 == 0:
        raise InvalidConfigError(f"block must be odd and >= 3, got {block}")
    r = block // 2
    padded = np.pad(img.pixels, r, mode="edge").astype(np.int64)
    sat = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=sat[1:, 1:])
    sums = (
        sat[block:, block:]
        - sat[:-block, block:]
        - sat[block:, :-block]
        + sat[:-block, :-block]
    )
    area = block * block
    keep = img.pixels.astype(np.int64) * area > sums - c * area
    return Raster(np.where(keep, 255, 0).astype(np.uint8))


def sobel_gradients(img: Raster) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel responses (gx, gy) as int32, edge-replicated borders."""
    if img.channels != 1:
        raise InvalidInputError("sobel_gradients operates on single-channel rasters")
    p = np.pad(img.pixels.astype(np.int32), 1, mode="edge")
    smooth_cols = p[:-2, :] + 2 * p[1:-1, :] + p[2:, :]  # (h, w+2)
    gx = smooth_cols[:, 2:] - smooth_cols[:, :-2]
    smooth_rows = p[:, :-2] + 2 * p[:, 1:-1] + p[:, 2:]  # (h+2, w)
    gy = smooth_rows[2:, :] - smooth_rows[:-2, :]
    return gx, gy


def canny(img: Raster, low: int = 50, high: int = 150) -> Raster:
    """Edge detection: Sobel L1 magnitude, 4-sector NMS, hysteresis linking.

    Keeps ridges whose suppressed magnitude reaches `high`, plus any >= `low`
    pixels 8-connected (transitively) to one of those. Output is binary {0, 255}.
    """
    if img.channels != 1:
        raise InvalidInputError("canny operates on single-channel rasters")
    if not (0 <= low < high <= MAX_CANNY_THRESHOLD):
        raise InvalidConfigError(
            f"need 0 <= low < high <= {MAX_CANNY_THRESHOLD}, got low={low} high={high}"
        )
    gx, gy = sobel_gradients(img)
    mag = np.abs(gx) + np.abs(gy)

    ax = np.abs(gx).astype(np.float64)
    ay = np.abs(gy).astype(np.float64)
    horizontal = ay <= _TAN_22_5 * ax
    vertical = ax <= _TAN_22_5 * ay
    same_sign = (gx.astype(np.int64) * gy.astype(np.int64)) > 0
    diag_main = ~horizontal & ~vertical & same_sign  # gradient along +x+y
    diag_anti = ~horizontal & ~vertical & ~same_sign

    mp = np.pad(mag, 1, mode="constant", constant_values=0)
    left, right = mp[1:-1, :-2], mp[1:-1, 2:]
    up, down = mp[:-2, 1:-1], mp[2:, 1:-1]
    up_left, down_right = mp[:-2, :-2], mp[2:, 2:]
    up_right, down_left = mp[:-2, 2:], mp[2:, :-2]

    prev_mag = np.select(
        [horizontal, vertical, diag_main, diag_anti],
        [left, up, up_left, up_right],
    )
    next_mag = np.select(
        [horizontal, vertical, diag_main, diag_anti],
        [right, down, down_right, down_left],
    )
    keep = (mag > 0) & (mag >= prev_mag) & (mag > next_mag)
    ridge = np.where(keep, mag, 0)

    weak = ridge >= low
    strong = ridge >= high
    if not strong.any():
        return Raster(np.zeros_like(img.pixels))
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    strong_labels = np.unique(labels[strong])
    strong_labels = strong_labels[strong_labels != 0]
    out = np.isin(labels, strong_labels)
    return Raster(np.where(out, 255, 0).astype(np.uint8))


@dataclass(frozen=True)
class RoiPolygon:
    """Simple polygon in normalized frame coordinates (x, y in [0, 1])."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidConfigError("ROI polygon needs at least 3 vertices")
        for x, y in verts:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise InvalidConfigError(f"ROI vertex ({x}, {y}) outside [0,1]x[0,1]")
        if abs(self.area()) == 0.0:
            raise InvalidConfigError("ROI polygon has zero area")
        if self._self_intersects():
            raise InvalidConfigError("ROI polygon is self-intersecting")

    def area(self) -> float:
        """Signed shoelace area in normalized units."""
        total = 0.0
        verts = self.vertices
        for (x1, y1), (x2, y2) in zip(verts, verts[1:] + verts[:1]):
            total += x1 * y2 - x2 * y1
        return 0.5 * total

    def _self_intersects(self) -> bool:
        # Proper crossings only; shared endpoints of adjacent edges are fine.
        verts = self.vertices
        n = len(verts)
        edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]

        def orient(p, q, r):
            return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                a, b = edges[i]
                c, d = edges[j]
                if (
                    orient(a, b, c) * orient(a, b, d) < 0
                    and orient(c, d, a) * orient(c, d, b) < 0
                ):
                    return True
        return False


# Forward-road trapezoid: full-width bottom edge, 45%-width top edge at y=0.60.
DEFAULT_ROI = RoiPolygon(((0.0, 1.0), (0.275, 0.6), (0.725, 0.6), (1.0, 1.0)))


@lru_cache(maxsize=16)
def roi_mask(roi: RoiPolygon, width: int, height: int) -> np.ndarray:
    """Boolean inside-mask for pixel centers, even-odd rule. Cached per size."""
    px = [(x * width, y * height) for x, y in roi.vertices]
    xc = np.arange(width, dtype=np.float64) + 0.5
    yc = np.arange(height, dtype=np.float64) + 0.5
    inside = np.zeros((height, width), dtype=bool)
    n = len(px)
    for i in range(n):
        x1, y1 = px[i]
        x2, y2 = px[(i + 1) % n]
        if y1 == y2:
            continue
        crosses = (y1 > yc) != (y2 > yc)  # (h,)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_int = x1 + (yc - y1) * (x2 - x1) / (y2 - y1)  # (h,)
        hit = crosses[:, None] & (xc[None, :] < x_int[:, None])
        inside ^= hit
    mask = inside.copy()
    mask.setflags(write=False)
    return mask


def apply_roi(img: Raster, roi: RoiPolygon) -> Raster:
    """Zero every pixel whose center falls outside the polygon."""
    if img.channels != 1:
        raise InvalidInputError("apply_roi operates on single-channel rasters")
    mask = roi_mask(roi, img.width, img.height)
    return Raster(np.where(mask, img.pixels, 0).astype(np.uint8))
