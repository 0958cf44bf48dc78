"""Synthetic single-rectangle scenes with jittered candidate boxes.

Each scene is a dark canvas with one bright axis-aligned rectangle kept away
from the image border, plus a candidate box jittered in position and scale
until its overlap with the rectangle lands in a target IoU band. The recorded
rectangle doubles as ground truth, which makes these scenes an exact oracle
for end-to-end refinement checks and demo corpora.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import BBox, bbox_iou
from .raster import Raster, save_pgm


@dataclass(frozen=True)
class SyntheticScene:
    image: Raster
    target: BBox
    proposal: BBox


def random_scene(
    rng: np.random.Generator,
    size: int = 128,
    margin: int = 20,
    side_range: tuple[int, int] = (40, 80),
    iou_range: tuple[float, float] = (0.5, 0.7),
    fg_range: tuple[float, float] = (0.55, 1.0),
) -> SyntheticScene:
    """One rectangle scene with a candidate box in the requested IoU band."""
    lo, hi = side_range
    hi = min(hi, size - 2 * margin)
    if hi < lo:
        raise ValueError("side_range incompatible with size and margin")
    rect_w = int(rng.integers(lo, hi + 1))
    rect_h = int(rng.integers(lo, hi + 1))
    x1 = int(rng.integers(margin, size - margin - rect_w + 1))
    y1 = int(rng.integers(margin, size - margin - rect_h + 1))
    target = BBox(x1, y1, x1 + rect_w, y1 + rect_h)

    values = np.zeros((size, size), dtype=np.float64)
    values[y1 : y1 + rect_h, x1 : x1 + rect_w] = float(rng.uniform(*fg_range))
    proposal = jitter_box(rng, target, size, iou_range)
    return SyntheticScene(image=Raster(values), target=target, proposal=proposal)


def jitter_box(
    rng: np.random.Generator,
    box: BBox,
    size: int,
    iou_range: tuple[float, float],
    max_tries: int = 10_000,
) -> BBox:
    """Random shift-and-rescale of a box, rejection-sampled into an IoU band."""
    lo, hi = iou_range
    for _ in range(max_tries):
        sx = float(rng.uniform(0.75, 1.3))
        sy = float(rng.uniform(0.75, 1.3))
        new_w = max(2, int(round(box.width * sx)))
        new_h = max(2, int(round(box.height * sy)))
        dx = int(round(rng.uniform(-0.3, 0.3) * box.width))
        dy = int(round(rng.uniform(-0.3, 0.3) * box.height))
        cx = (box.x1 + box.x2) / 2 + dx
        cy = (box.y1 + box.y2) / 2 + dy
        x1 = int(round(cx - new_w / 2))
        y1 = int(round(cy - new_h / 2))
        x2, y2 = x1 + new_w, y1 + new_h
        if x1 < 0 or y1 < 0 or x2 > size or y2 > size:
            continue
        candidate = BBox(x1, y1, x2, y2)
        if lo <= bbox_iou(candidate, box) <= hi:
            return candidate
    raise RuntimeError(f"no jitter with IoU in [{lo}, {hi}] after {max_tries} tries")


def scene_id(index: int) -> str:
    return f"scene_{index:04d}"


def write_corpus(
    directory: str | Path, scenes: list[SyntheticScene]
) -> list[str]:
    """Write scenes as a ready-to-run corpus; returns the image ids.

    Layout: images/<id>.pgm, proposals/<id>.csv (the jittered candidate with
    score 1.0), annotations.csv (the true rectangles).
    """
    directory = Path(directory)
    images_dir = directory / "images"
    proposals_dir = directory / "proposals"
    images_dir.mkdir(parents=True, exist_ok=True)
    proposals_dir.mkdir(parents=True, exist_ok=True)
    ids: list[str] = []
    gt_lines = ["image_id,x1,y1,x2,y2"]
    for i, scene in enumerate(scenes):
        sid = scene_id(i)
        ids.append(sid)
        save_pgm(scene.image, images_dir / f"{sid}.pgm")
        p = scene.proposal
        (proposals_dir / f"{sid}.csv").write_text(
            f"x1,y1,x2,y2,score\n{p.x1},{p.y1},{p.x2},{p.y2},1.0\n",
            encoding="utf-8",
        )
        t = scene.target
        gt_lines.append(f"{sid},{t.x1},{t.y1},{t.x2},{t.y2}")
    (directory / "annotations.csv").write_text(
        "\n".join(gt_lines) + "\n", encoding="utf-8"
    )
    return ids
