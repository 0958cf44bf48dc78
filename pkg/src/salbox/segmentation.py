"""Graph-based superpixel segmentation on the 8-connected pixel grid.

The classic greedy merge over intensity-difference edges: regions C1, C2 join
when the connecting edge weight is at most min(Int(C1) + k/|C1|,
Int(C2) + k/|C2|), where Int is the largest weight already absorbed by the
region. Edge weights are measured on the 0-255 intensity scale so the scale
constant k keeps its conventional magnitude for 8-bit imagery; [0, 1] rasters
are rescaled internally.

A second pass walks the edges again in ascending order and merges any region
still smaller than min_size into the neighbor across its cheapest remaining
boundary edge (its most similar neighbor at that point of the sweep).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import Raster, save_png_rgb

INTENSITY_SCALE = 255.0


@dataclass(frozen=True)
class SegParams:
    """Knobs of the graph merge: pre-smoothing, scale of observation, min area."""

    sigma: float = 0.8
    k: float = 100.0
    min_size: int = 100

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.k <= 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if self.min_size < 1:
            raise ValueError(f"min_size must be >= 1, got {self.min_size}")


@dataclass(frozen=True, eq=False)
class SuperpixelLabeling:
    """Dense per-pixel region ids 0..R-1 partitioning the image."""

    labels: np.ndarray
    region_sizes: np.ndarray

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=np.int32, copy=True)
        sizes = np.array(self.region_sizes, dtype=np.int64, copy=True)
        if labels.ndim != 2:
            raise ValueError("labels must be a 2-d grid")
        if sizes.sum() != labels.size:
            raise ValueError("region_sizes must sum to the pixel count")
        labels.flags.writeable = False
        sizes.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "region_sizes", sizes)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def num_regions(self) -> int:
        return len(self.region_sizes)


def gaussian_smooth(img: Raster, sigma: float) -> Raster:
    """Separable Gaussian blur with kernel radius ceil(3*sigma), edge-clamped.

    sigma = 0 returns the input unchanged.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img
    radius = math.ceil(3.0 * sigma)
    taps = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(taps**2) / (2.0 * sigma * sigma))
    kernel /= kernel.sum()
    out = _convolve_axis(img.values, kernel, axis=1)
    out = _convolve_axis(out, kernel, axis=0)
    return Raster(out)


def _convolve_axis(a: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(a, pad, mode="edge")
    out = np.zeros_like(a)
    for j, weight in enumerate(kernel):
        if axis == 1:
            out += weight * padded[:, j : j + a.shape[1]]
        else:
            out += weight * padded[j : j + a.shape[0], :]
    return out


def _grid_edges(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """8-connectivity edges (src, dst, weight), each pair emitted once.

    src is always the smaller linear pixel index, which fixes the
    (weight, src, dst) tie-break order for the merge sweep.
    """
    h, w = values.shape
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)
    srcs, dsts, wts = [], [], []

    def add(sa: tuple[slice, slice], sb: tuple[slice, slice]) -> None:
        srcs.append(idx[sa].ravel())
        dsts.append(idx[sb].ravel())
        wts.append(np.abs(values[sa] - values[sb]).ravel())

    add((slice(None), slice(0, w - 1)), (slice(None), slice(1, w)))  # right
    add((slice(0, h - 1), slice(None)), (slice(1, h), slice(None)))  # down
    add((slice(0, h - 1), slice(0, w - 1)), (slice(1, h), slice(1, w)))  # down-right
    add((slice(0, h - 1), slice(1, w)), (slice(1, h), slice(0, w - 1)))  # down-left
    if not srcs:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0, dtype=np.float64)
    return np.concatenate(srcs), np.concatenate(dsts), np.concatenate(wts)


def segment_image(img: Raster, params: SegParams) -> SuperpixelLabeling:
    """Segment a raster into superpixels; deterministic for fixed inputs."""
    smoothed = gaussian_smooth(img, params.sigma)
    values = smoothed.values * INTENSITY_SCALE
    n = values.size
    src, dst, weight = _grid_edges(values)
    # lexsort: last key is primary, so order is (weight, src, dst)
    order = np.lexsort((dst, src, weight)).tolist()
    src_l = src.tolist()
    dst_l = dst.tolist()
    w_l = weight.tolist()

    parent = list(range(n))
    rank = [0] * n
    size = [1] * n
    k = float(params.k)
    threshold = [k] * n

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> int:
        if rank[a] < rank[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
        if rank[a] == rank[b]:
            rank[a] += 1
        return a

    for e in order:
        a = find(src_l[e])
        b = find(dst_l[e])
        if a == b:
            continue
        we = w_l[e]
        if we <= threshold[a] and we <= threshold[b]:
            root = union(a, b)
            threshold[root] = we + k / size[root]

    if params.min_size > 1:
        min_size = params.min_size
        for e in order:
            a = find(src_l[e])
            b = find(dst_l[e])
            if a != b and (size[a] < min_size or size[b] < min_size):
                union(a, b)

    roots = np.array(parent, dtype=np.int64)
    while True:
        hop = roots[roots]
        if np.array_equal(hop, roots):
            break
        roots = hop
    _, labels = np.unique(roots, return_inverse=True)
    labels2d = labels.reshape(values.shape).astype(np.int32)
    sizes = np.bincount(labels)
    return SuperpixelLabeling(labels2d, sizes)


def save_label_image(
    labeling: SuperpixelLabeling, path: str | Path, seed: int = 0
) -> None:
    """Dump a labeling as a random-color PNG for visual inspection."""
    rng = np.random.default_rng(seed)
    colors = rng.integers(0, 256, size=(labeling.num_regions, 3), dtype=np.uint8)
    save_png_rgb(colors[labeling.labels], path)
