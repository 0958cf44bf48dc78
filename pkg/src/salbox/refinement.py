"""Per-candidate-box refinement through multi-size window saliency.

Each candidate box is grown by a ladder of margins. Inside every window the
superpixels touching the one-pixel inner ring seed the background, geodesic
saliency is computed and normalized, and the tight bounding box of the
pixels whose superpixel clears the binarization threshold becomes the
refined box. An empty salient set falls back to the original box, so the
stage never loses a candidate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import ContourMap
from .geometry import BBox, clamp_box
from .saliency import (
    SaliencyMap,
    build_region_graph,
    geodesic_saliency,
    normalize_saliency,
)
from .segmentation import SuperpixelLabeling


@dataclass(frozen=True)
class RefineParams:
    """Binarization threshold and the ladder of window margins (pixels)."""

    threshold: float = 0.01
    deltas: tuple[int, ...] = (1, 5, 15, 25)

    def __post_init__(self) -> None:
        if not (0.0 < self.threshold < 1.0):
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")
        deltas = tuple(int(d) for d in self.deltas)
        if not deltas:
            raise ValueError("deltas must not be empty")
        if any(d < 0 for d in deltas):
            raise ValueError(f"deltas must be >= 0, got {deltas}")
        if any(a >= b for a, b in zip(deltas, deltas[1:])):
            raise ValueError(f"deltas must be strictly increasing, got {deltas}")
        object.__setattr__(self, "deltas", deltas)

    @property
    def num_sizes(self) -> int:
        return len(self.deltas)

    @property
    def max_window_index(self) -> int:
        return len(self.deltas) - 1


@dataclass(frozen=True)
class RefinedProposal:
    """A refined box plus which window size produced it and its source box."""

    box: BBox
    window_index: int
    source: int = 0


@dataclass(frozen=True, eq=False)
class WindowRefinement:
    """Full per-window record: kept for scoring and map dumps."""

    window: BBox
    window_index: int
    saliency: SaliencyMap  # normalized
    box: BBox
    fallback: bool


def enlarge_window(box: BBox, delta: int, width: int, height: int) -> BBox:
    """Grow a box by delta pixels on all four sides, clipped to the raster."""
    grown = BBox(box.x1 - delta, box.y1 - delta, box.x2 + delta, box.y2 + delta)
    return clamp_box(grown, width, height)


def select_background_nodes(
    labeling: SuperpixelLabeling, window: BBox
) -> frozenset[int]:
    """Superpixels owning at least one pixel on the window's inner 1-px ring."""
    sub = labeling.labels[window.y1 : window.y2, window.x1 : window.x2]
    ring = np.concatenate([sub[0, :], sub[-1, :], sub[:, 0].ravel(), sub[:, -1].ravel()])
    return frozenset(int(t) for t in np.unique(ring))


def refine_windows(
    box: BBox,
    labeling: SuperpixelLabeling,
    contour: ContourMap,
    params: RefineParams,
) -> list[WindowRefinement]:
    """Run the window ladder for one candidate box.

    Raises EmptyAfterClamp when the candidate lies fully outside the raster.
    """
    width, height = labeling.width, labeling.height
    base = clamp_box(box, width, height)
    results: list[WindowRefinement] = []
    for m, delta in enumerate(params.deltas):
        window = enlarge_window(base, delta, width, height)
        graph = build_region_graph(labeling, contour, window)
        background = select_background_nodes(labeling, window)
        smap = normalize_saliency(geodesic_saliency(graph, background))
        salient = [t for t, v in smap.values.items() if v > params.threshold]
        refined = _tight_box(labeling, window, salient)
        results.append(
            WindowRefinement(
                window=window,
                window_index=m,
                saliency=smap,
                box=refined if refined is not None else base,
                fallback=refined is None,
            )
        )
    return results


def refine_box(
    box: BBox,
    labeling: SuperpixelLabeling,
    contour: ContourMap,
    params: RefineParams,
    source: int = 0,
) -> list[RefinedProposal]:
    """Refined boxes for one candidate, one per window size."""
    return [
        RefinedProposal(box=r.box, window_index=r.window_index, source=source)
        for r in refine_windows(box, labeling, contour, params)
    ]


def _tight_box(
    labeling: SuperpixelLabeling, window: BBox, salient: list[int]
) -> BBox | None:
    if not salient:
        return None
    sub = labeling.labels[window.y1 : window.y2, window.x1 : window.x2]
    mask = np.isin(sub, salient)
    if not mask.any():
        return None
    ys, xs = np.nonzero(mask)
    return BBox(
        window.x1 + int(xs.min()),
        window.y1 + int(ys.min()),
        window.x1 + int(xs.max()) + 1,
        window.y1 + int(ys.max()) + 1,
    )
