"""Scoring, merging, and suppression of refined proposals.

A refined box is scored by the saliency mass it encloses, discounted by a
sub-linear power of its area (favoring larger boxes) and by how much its
window was enlarged (larger windows admit more clutter, so they earn a
smaller prefactor). Refined and input proposals are then merged on equal
footing through per-list normalized inverse indexes, and greedy NMS prunes
near-duplicates.

Proposal files are one-line-per-box CSV, `x1,y1,x2,y2,score`, best first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ParseError
from .geometry import BBox, bbox_area, bbox_iou
from .refinement import RefinedProposal
from .saliency import SaliencyMap
from .segmentation import SuperpixelLabeling

PROPOSAL_HEADER = "x1,y1,x2,y2,score"


@dataclass(frozen=True)
class RankParams:
    area_exponent: float = 0.9  # sub-linear area discount, must stay below 1
    nms_iou: float = 0.9
    max_proposals: int = 1000

    def __post_init__(self) -> None:
        if not (0.0 < self.area_exponent < 1.0):
            raise ValueError(
                f"area_exponent must be in (0, 1), got {self.area_exponent}"
            )
        if not (0.0 < self.nms_iou <= 1.0):
            raise ValueError(f"nms_iou must be in (0, 1], got {self.nms_iou}")
        if self.max_proposals < 1:
            raise ValueError(f"max_proposals must be >= 1, got {self.max_proposals}")


@dataclass(frozen=True)
class ScoredProposal:
    box: BBox
    score: float
    origin: str = "input"  # "input" or "refined"
    window_index: int = -1

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError(f"score must be finite, got {self.score}")
        if self.origin not in ("input", "refined"):
            raise ValueError(f"unknown origin {self.origin!r}")


def saliency_score(
    refined: RefinedProposal,
    smap: SaliencyMap,
    labeling: SuperpixelLabeling,
    max_window_index: int,
    area_exponent: float,
) -> float:
    """Window-discounted saliency mass of a refined box, area-normalized.

    score = (M + 1 - m) * sum_t S(t) * size(t) / area^lambda, where size(t)
    counts the pixels of superpixel t inside the refined box and S comes from
    the normalized window saliency map.
    """
    b = refined.box
    counts = np.bincount(
        labeling.labels[b.y1 : b.y2, b.x1 : b.x2].ravel(),
        minlength=labeling.num_regions,
    )
    mass = math.fsum(
        s * int(counts[t]) for t, s in smap.values.items() if counts[t]
    )
    prefactor = max_window_index + 1 - refined.window_index
    return prefactor * mass / bbox_area(b) ** area_exponent


def merge_rerank(
    refined_sorted: list[ScoredProposal], input_ordered: list[ScoredProposal]
) -> list[ScoredProposal]:
    """Merge two ranked lists through per-list normalized inverse indexes.

    Within a list of length N the item at 0-based index i is re-scored to
    (N - i) / N, then both lists are re-sorted together by that score. Ties
    rank input proposals ahead of refined ones (the generator's ordering is
    trusted when saliency evidence is neutral), then by original index.
    """
    entries: list[tuple[float, int, int, ScoredProposal]] = []
    n_in = len(input_ordered)
    for i, p in enumerate(input_ordered):
        entries.append(((n_in - i) / n_in, 0, i, p))
    n_ref = len(refined_sorted)
    for i, p in enumerate(refined_sorted):
        entries.append(((n_ref - i) / n_ref, 1, i, p))
    entries.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [replace(p, score=score) for score, _, _, p in entries]


def nms(
    proposals: list[ScoredProposal],
    iou_thresh: float,
    budget: int | None = None,
) -> list[ScoredProposal]:
    """Greedy suppression: keep a proposal iff it overlaps every kept one
    below iou_thresh; stop once `budget` proposals are kept."""
    kept: list[ScoredProposal] = []
    for p in proposals:
        if budget is not None and len(kept) >= budget:
            break
        if all(bbox_iou(p.box, q.box) < iou_thresh for q in kept):
            kept.append(p)
    return kept


def write_proposals_csv(path: str | Path, proposals: list[ScoredProposal]) -> None:
    lines = [PROPOSAL_HEADER]
    for p in proposals:
        lines.append(f"{p.box.x1},{p.box.y1},{p.box.x2},{p.box.y2},{p.score}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_proposals_csv(path: str | Path) -> list[ScoredProposal]:
    """Read a ranked proposal file; rows come back in file order."""
    out: list[ScoredProposal] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.lower().startswith("x1"):
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise ParseError(f"{path}:{lineno}: expected 5 fields, got {len(fields)}")
        try:
            x1, y1, x2, y2 = (int(round(float(f))) for f in fields[:4])
            score = float(fields[4])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        out.append(ScoredProposal(box=BBox(x1, y1, x2, y2), score=score))
    return out
