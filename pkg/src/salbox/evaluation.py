"""Recall metrics for proposal sets against ground-truth boxes.

A ground-truth box counts as covered at threshold tau when any of the image's
top-n proposals reaches IoU >= tau with it; proposals are not consumed, so one
proposal may cover several ground-truth boxes. Recall aggregates over the
whole dataset. Average recall is the plain mean of recall over the IoU grid
0.50, 0.55, ..., 1.00.

Ground truth comes from VOC-style XML annotations (inclusive 1-based corner
coordinates, converted to half-open 0-based on load) or from a flat CSV
`image_id,x1,y1,x2,y2` already in half-open pixel coordinates.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import NoGroundTruth, ParseError
from .geometry import BBox, bbox_iou

IOU_GRID = tuple(i / 100 for i in range(50, 101, 5))


@dataclass(frozen=True)
class AnnotatedBox:
    box: BBox
    label: str = ""
    difficult: bool = False


GroundTruth = dict[str, list[AnnotatedBox]]


def _as_box(p) -> BBox:
    # proposals may be passed as plain BBox or anything carrying a .box
    return p if isinstance(p, BBox) else p.box


def iou_grid(lo: float = 0.5, hi: float = 1.0, step: float = 0.05) -> tuple[float, ...]:
    """Evenly spaced IoU thresholds from lo to hi inclusive."""
    if step <= 0 or hi <= lo:
        raise ValueError(f"bad grid spec lo={lo} hi={hi} step={step}")
    n = int(round((hi - lo) / step))
    return tuple(round(lo + i * step, 10) for i in range(n + 1))


@dataclass(frozen=True)
class RecallCurve:
    """Recall sampled over increasing thresholds or proposal counts."""

    xs: tuple[float, ...]
    recalls: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.recalls):
            raise ValueError("xs and recalls must have equal length")
        if any(a >= b for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("curve x values must be strictly increasing")


def _counted_gt(
    gt: GroundTruth, include_difficult: bool
) -> list[tuple[str, BBox]]:
    boxes = [
        (image_id, ann.box)
        for image_id, anns in gt.items()
        for ann in anns
        if include_difficult or not ann.difficult
    ]
    if not boxes:
        raise NoGroundTruth("no ground-truth boxes to evaluate against")
    return boxes


def recall_at(
    proposals: Mapping[str, Sequence],
    gt: GroundTruth,
    iou_thresh: float,
    include_difficult: bool = False,
) -> float:
    """Dataset recall of already-truncated per-image proposal lists."""
    if not (0.0 < iou_thresh <= 1.0):
        raise ValueError(f"iou_thresh must be in (0, 1], got {iou_thresh}")
    boxes = _counted_gt(gt, include_difficult)
    hit = 0
    for image_id, gt_box in boxes:
        cands = proposals.get(image_id, ())
        if any(bbox_iou(_as_box(p), gt_box) >= iou_thresh for p in cands):
            hit += 1
    return hit / len(boxes)


def recall_iou_curve(
    proposals: Mapping[str, Sequence],
    gt: GroundTruth,
    n: int,
    grid: tuple[float, ...] = IOU_GRID,
    include_difficult: bool = False,
) -> RecallCurve:
    """Recall over an IoU grid using each image's top-n proposals."""
    top = {image_id: list(plist)[:n] for image_id, plist in proposals.items()}
    recalls = tuple(
        recall_at(top, gt, tau, include_difficult=include_difficult) for tau in grid
    )
    return RecallCurve(xs=tuple(grid), recalls=recalls)


def average_recall(
    proposals: Mapping[str, Sequence],
    gt: GroundTruth,
    n: int,
    grid: tuple[float, ...] = IOU_GRID,
    include_difficult: bool = False,
) -> float:
    """Mean of recall over the IoU grid with top-n proposals per image."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    curve = recall_iou_curve(proposals, gt, n, grid, include_difficult)
    return sum(curve.recalls) / len(curve.recalls)


def first_match_ranks(
    proposals: Mapping[str, Sequence],
    gt: GroundTruth,
    thresholds: Sequence[float],
    include_difficult: bool = False,
) -> tuple[int, dict[float, np.ndarray]]:
    """For each threshold, the 1-based rank of the first matching proposal
    per ground-truth box (inf when never matched).

    Lets recall-vs-count sweeps run in one pass: recall at count n equals
    the fraction of ranks <= n.
    """
    boxes = _counted_gt(gt, include_difficult)
    ranks: dict[float, list[float]] = {tau: [] for tau in thresholds}
    for image_id, gt_box in boxes:
        plist = proposals.get(image_id, ())
        ious = np.array([bbox_iou(_as_box(p), gt_box) for p in plist])
        best_so_far = np.maximum.accumulate(ious) if len(ious) else ious
        for tau in thresholds:
            matched = np.nonzero(best_so_far >= tau)[0]
            ranks[tau].append(float(matched[0]) + 1.0 if len(matched) else np.inf)
    return len(boxes), {tau: np.array(r) for tau, r in ranks.items()}


def recall_count_curve(
    proposals: Mapping[str, Sequence],
    gt: GroundTruth,
    iou_thresh: float,
    counts: Sequence[int],
    include_difficult: bool = False,
) -> RecallCurve:
    """Recall as a function of the per-image proposal budget."""
    total, ranks = first_match_ranks(
        proposals, gt, [iou_thresh], include_difficult=include_difficult
    )
    r = ranks[iou_thresh]
    recalls = tuple(float(np.sum(r <= n)) / total for n in counts)
    return RecallCurve(xs=tuple(float(n) for n in counts), recalls=recalls)


def load_voc_annotations(path: str | Path) -> list[AnnotatedBox]:
    """Parse one VOC XML annotation file.

    bndbox corners are inclusive and 1-based; they convert to half-open
    0-based as x1 = xmin - 1, y1 = ymin - 1, x2 = xmax, y2 = ymax.
    """
    try:
        root = ET.parse(Path(path)).getroot()
    except (ET.ParseError, OSError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    out: list[AnnotatedBox] = []
    for obj in root.iter("object"):
        name = (obj.findtext("name") or "").strip()
        difficult = (obj.findtext("difficult") or "0").strip() not in ("", "0")
        bnd = obj.find("bndbox")
        if bnd is None:
            raise ParseError(f"{path}: object without bndbox")
        try:
            xmin, ymin, xmax, ymax = (
                int(round(float(bnd.findtext(tag) or "")))
                for tag in ("xmin", "ymin", "xmax", "ymax")
            )
        except ValueError as exc:
            raise ParseError(f"{path}: bad bndbox coordinate") from exc
        box = BBox(xmin - 1, ymin - 1, xmax, ymax)  # InvalidBox propagates
        out.append(AnnotatedBox(box=box, label=name, difficult=difficult))
    return out


def load_voc_directory(directory: str | Path) -> GroundTruth:
    """Load every *.xml annotation in a directory, keyed by file stem."""
    gt: GroundTruth = {}
    for xml_path in sorted(Path(directory).glob("*.xml")):
        gt[xml_path.stem] = load_voc_annotations(xml_path)
    return gt


def load_csv_annotations(path: str | Path) -> GroundTruth:
    """Load the flat CSV fallback: image_id,x1,y1,x2,y2 per line."""
    gt: GroundTruth = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.lower().startswith("image_id"):
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise ParseError(f"{path}:{lineno}: expected 5 fields")
        image_id = fields[0].strip()
        try:
            x1, y1, x2, y2 = (int(round(float(f))) for f in fields[1:])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        gt.setdefault(image_id, []).append(AnnotatedBox(box=BBox(x1, y1, x2, y2)))
    return gt


def write_curve_csv(path: str | Path, curve: RecallCurve, x_name: str) -> None:
    lines = [f"{x_name},recall"]
    for x, r in zip(curve.xs, curve.recalls):
        lines.append(f"{x},{r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
