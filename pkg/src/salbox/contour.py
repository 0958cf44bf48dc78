"""Per-pixel contour response maps: file ingestion and a Sobel fallback.

A contour map is a raster of soft edge strengths in [0, 1] with the same
dimensions as the image it describes. Precomputed maps from an external edge
detector are the preferred source; the Sobel gradient magnitude is a
self-contained fallback whose quality bounds the whole refinement, so supply
real contour files whenever available.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DimensionMismatch
from .raster import Raster, load_grayscale

# A contour map is structurally a Raster; the alias marks intent in signatures.
ContourMap = Raster

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T


def load_contour_map(
    path: str | Path, expected_width: int, expected_height: int
) -> ContourMap:
    """Load a grayscale contour file, rescaled to [0, 1] by its format maxval."""
    raster = load_grayscale(path)
    if raster.width != expected_width or raster.height != expected_height:
        raise DimensionMismatch(
            f"{path}: contour is {raster.width}x{raster.height}, "
            f"image is {expected_width}x{expected_height}"
        )
    return raster


def sobel_contour(img: Raster) -> ContourMap:
    """Gradient-magnitude contour, normalized by its global maximum.

    Borders are edge-clamped, so the response is invariant to adding a
    constant to the image. Computed as central differences followed by the
    [1, 2, 1] smoothing of the orthogonal axis; differencing first makes
    flat regions come out exactly zero instead of accumulating float dust
    that a later min-max normalization would blow up into fake structure.
    """
    padded = np.pad(img.values, 1, mode="edge")
    dx = padded[:, 2:] - padded[:, :-2]
    gx = dx[:-2, :] + 2.0 * dx[1:-1, :] + dx[2:, :]
    dy = padded[2:, :] - padded[:-2, :]
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    magnitude = np.hypot(gx, gy)
    peak = float(magnitude.max())
    if peak > 0.0:
        magnitude /= peak
    return Raster(magnitude)
