"""Contour-weighted region adjacency graphs and geodesic background distance.

Inside a window, adjacent superpixels are linked by an edge whose weight is
the mean contour response over their shared boundary pixels. The saliency of
a superpixel is the cheapest path cost from the designated background nodes;
regions separated from the border by strong contours accumulate distance and
stand out, regions leaking into the border stay near zero.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .contour import ContourMap
from .errors import DimensionMismatch, EmptyBackground, NoFiniteValues
from .geometry import BBox
from .raster import save_png_gray
from .segmentation import SuperpixelLabeling

UNREACHABLE = math.inf


@dataclass(frozen=True, eq=False)
class RegionGraph:
    """Superpixels of one window with boundary-contrast edges.

    weights[(i, j)] with i < j is the mean contour response over the shared
    boundary pixel set; boundary_sizes holds that set's cardinality. Non
    adjacent superpixels have no edge at all. sizes counts each node's pixels
    inside the window only.
    """

    nodes: tuple[int, ...]
    sizes: dict[int, int]
    weights: dict[tuple[int, int], float]
    boundary_sizes: dict[tuple[int, int], int]

    def neighbors(self) -> dict[int, list[tuple[int, float]]]:
        adj: dict[int, list[tuple[int, float]]] = {t: [] for t in self.nodes}
        for (i, j), w in self.weights.items():
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    """Background distance per node; background nodes sit at exactly 0."""

    values: dict[int, float]
    background: frozenset[int]


def build_region_graph(
    labeling: SuperpixelLabeling, contour: ContourMap, window: BBox
) -> RegionGraph:
    """Restrict the labeling to a window and weight adjacencies by contour.

    Every 4-adjacent pixel pair (p, q) inside the window with different labels
    contributes both p and q to the boundary set of that label pair; each
    pixel is counted once per pair of labels.
    """
    if labeling.labels.shape != contour.values.shape:
        raise DimensionMismatch(
            f"labeling {labeling.labels.shape} vs contour {contour.values.shape}"
        )
    if not (
        0 <= window.x1 and window.x2 <= labeling.width
        and 0 <= window.y1 and window.y2 <= labeling.height
    ):
        raise ValueError(f"window {window.as_tuple()} outside the raster")

    sub = labeling.labels[window.y1 : window.y2, window.x1 : window.x2]
    con = contour.values[window.y1 : window.y2, window.x1 : window.x2].ravel()
    node_ids, counts = np.unique(sub, return_counts=True)
    sizes = {int(t): int(c) for t, c in zip(node_ids, counts)}

    h, w = sub.shape
    lin = np.arange(h * w, dtype=np.int64).reshape(h, w)
    los, his, pix = [], [], []
    for (sa, sb) in (
        ((slice(None), slice(0, w - 1)), (slice(None), slice(1, w))),
        ((slice(0, h - 1), slice(None)), (slice(1, h), slice(None))),
    ):
        la = sub[sa].ravel()
        lb = sub[sb].ravel()
        cross = la != lb
        if not cross.any():
            continue
        la, lb = la[cross], lb[cross]
        pa = lin[sa].ravel()[cross]
        pb = lin[sb].ravel()[cross]
        lo = np.minimum(la, lb).astype(np.int64)
        hi = np.maximum(la, lb).astype(np.int64)
        los.extend((lo, lo))
        his.extend((hi, hi))
        pix.extend((pa, pb))

    weights: dict[tuple[int, int], float] = {}
    boundary_sizes: dict[tuple[int, int], int] = {}
    if los:
        rows = np.stack(
            [np.concatenate(los), np.concatenate(his), np.concatenate(pix)], axis=1
        )
        rows = np.unique(rows, axis=0)
        pair_keys = rows[:, 0] * (labeling.num_regions + 1) + rows[:, 1]
        _, starts, group_counts = np.unique(
            pair_keys, return_index=True, return_counts=True
        )
        for start, cnt in zip(starts.tolist(), group_counts.tolist()):
            i = int(rows[start, 0])
            j = int(rows[start, 1])
            pixels = rows[start : start + cnt, 2]
            total = math.fsum(con[pixels].tolist())
            weights[(i, j)] = total / cnt
            boundary_sizes[(i, j)] = cnt

    return RegionGraph(
        nodes=tuple(int(t) for t in node_ids),
        sizes=sizes,
        weights=weights,
        boundary_sizes=boundary_sizes,
    )


def geodesic_saliency(graph: RegionGraph, background: frozenset[int] | set[int]) -> SaliencyMap:
    """Cheapest path cost from the background node set to every node.

    Computed as one shortest-path sweep from a virtual source attached to all
    background nodes with zero cost. Nodes cut off from the background keep
    the UNREACHABLE sentinel.
    """
    if not background:
        raise EmptyBackground("background node set is empty")
    node_set = set(graph.nodes)
    stray = set(background) - node_set
    if stray:
        raise ValueError(f"background nodes {sorted(stray)} not in graph")

    adjacency = graph.neighbors()
    dist = {t: UNREACHABLE for t in graph.nodes}
    heap: list[tuple[float, int]] = []
    for t in sorted(background):
        dist[t] = 0.0
        heapq.heappush(heap, (0.0, t))
    while heap:
        d, t = heapq.heappop(heap)
        if d > dist[t]:
            continue
        for u, w in adjacency[t]:
            nd = d + w
            if nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return SaliencyMap(values=dist, background=frozenset(background))


def normalize_saliency(smap: SaliencyMap) -> SaliencyMap:
    """Rescale finite values to [0, 1]; unreachable nodes map to 1.

    An all-equal map collapses to all zeros: a flat map carries no
    figure/ground evidence, and downstream refinement falls back to the
    input box in that case.
    """
    finite = [v for v in smap.values.values() if math.isfinite(v)]
    if not finite:
        raise NoFiniteValues("saliency map has no finite value")
    lo = min(finite)
    hi = max(finite)
    span = hi - lo
    out: dict[int, float] = {}
    for t, v in smap.values.items():
        if not math.isfinite(v):
            out[t] = 1.0
        elif span == 0.0:
            out[t] = 0.0
        else:
            out[t] = (v - lo) / span
    return SaliencyMap(values=out, background=smap.background)


def render_window_saliency(
    labeling: SuperpixelLabeling, smap: SaliencyMap, window: BBox
) -> np.ndarray:
    """Paint each window pixel with its superpixel's saliency value."""
    sub = labeling.labels[window.y1 : window.y2, window.x1 : window.x2]
    lut = np.zeros(labeling.num_regions, dtype=np.float64)
    for t, v in smap.values.items():
        lut[t] = min(v, 1.0) if math.isfinite(v) else 1.0
    return lut[sub]


def save_window_saliency_png(
    labeling: SuperpixelLabeling, smap: SaliencyMap, window: BBox, path: str | Path
) -> None:
    """Write the per-pixel saliency of one window as a grayscale PNG."""
    save_png_gray(render_window_saliency(labeling, smap, window), path)
