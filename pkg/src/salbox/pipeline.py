"""End-to-end orchestration: refine proposal files per image, then evaluate.

One image is processed by a pure function (segment once, contour once, refine
every candidate at all window sizes, score, merge with the input ordering,
NMS), so images parallelize over a process pool without affecting results;
the parent writes output files in a fixed order either way.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .contour import ContourMap, load_contour_map, sobel_contour
from .errors import EmptyAfterClamp, SalboxError
from .evaluation import (
    GroundTruth,
    RecallCurve,
    average_recall,
    iou_grid,
    load_csv_annotations,
    load_voc_directory,
    recall_count_curve,
    recall_iou_curve,
    first_match_ranks,
    write_curve_csv,
)
from .ranking import (
    RankParams,
    ScoredProposal,
    merge_rerank,
    nms,
    read_proposals_csv,
    saliency_score,
    write_proposals_csv,
)
from .raster import Raster, load_image
from .refinement import RefinedProposal, RefineParams, refine_windows
from .segmentation import SegParams, segment_image

log = logging.getLogger("salbox")

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")


@dataclass(frozen=True)
class PipelineConfig:
    images_dir: Path
    proposals_dir: Path
    output_dir: Path
    annotations: Path | None = None
    contour_dir: Path | None = None
    contour_source: str = "sobel"  # sobel | files | auto
    seg: SegParams = field(default_factory=SegParams)
    refine: RefineParams = field(default_factory=RefineParams)
    rank: RankParams = field(default_factory=RankParams)
    budgets: tuple[int, ...] = (500, 1000, 2000)
    curve_ious: tuple[float, ...] = (0.7, 0.8, 0.9)
    max_count: int = 1000
    ar_step: float = 0.05
    include_difficult: bool = False
    workers: int = 1
    eval_proposals: Path | None = None  # defaults to output_dir
    eval_out: Path | None = None  # defaults to output_dir / "eval"


@dataclass(frozen=True)
class RefineOutcome:
    """Refined list in score order plus the final merged, suppressed list."""

    refined: list[ScoredProposal]
    final: list[ScoredProposal]


def refine_image_proposals(
    image: Raster,
    contour: ContourMap,
    input_proposals: list[ScoredProposal],
    seg_params: SegParams,
    refine_params: RefineParams,
    rank_params: RankParams,
) -> RefineOutcome:
    """The whole per-image stage on in-memory data."""
    labeling = segment_image(image, seg_params)
    refined: list[ScoredProposal] = []
    for j, p in enumerate(input_proposals):
        try:
            windows = refine_windows(p.box, labeling, contour, refine_params)
        except EmptyAfterClamp:
            log.warning("input box %d lies outside the image, not refined", j)
            continue
        for w in windows:
            rp = RefinedProposal(box=w.box, window_index=w.window_index, source=j)
            score = saliency_score(
                rp,
                w.saliency,
                labeling,
                refine_params.max_window_index,
                rank_params.area_exponent,
            )
            refined.append(
                ScoredProposal(
                    box=w.box, score=score, origin="refined",
                    window_index=w.window_index,
                )
            )
    refined.sort(key=lambda sp: -sp.score)  # stable: generation order on ties
    merged = merge_rerank(refined, input_proposals)
    final = nms(merged, rank_params.nms_iou, rank_params.max_proposals)
    return RefineOutcome(refined=refined, final=final)


def list_image_ids(images_dir: Path) -> list[str]:
    ids = sorted(
        p.stem for p in images_dir.iterdir()
        if p.suffix.lower() in IMAGE_SUFFIXES
    )
    return ids


def find_contour_file(contour_dir: Path, image_id: str) -> Path | None:
    for suffix in IMAGE_SUFFIXES:
        candidate = contour_dir / f"{image_id}{suffix}"
        if candidate.exists():
            return candidate
    return None


def contour_for_image(config: PipelineConfig, image_id: str, image: Raster) -> ContourMap:
    source = config.contour_source
    if source not in ("sobel", "files", "auto"):
        raise SalboxError(f"unknown contour source {source!r}")
    if source == "sobel":
        return sobel_contour(image)
    path = find_contour_file(config.contour_dir, image_id) if config.contour_dir else None
    if path is None:
        if source == "auto":
            return sobel_contour(image)
        raise SalboxError(f"no contour file for image {image_id!r}")
    return load_contour_map(path, image.width, image.height)


def _refine_one(args: tuple[PipelineConfig, str]) -> tuple[str, list[ScoredProposal] | None, str | None]:
    config, image_id = args
    try:
        image_path = _image_path(config.images_dir, image_id)
        image = load_image(image_path)
        contour = contour_for_image(config, image_id, image)
        proposals_path = config.proposals_dir / f"{image_id}.csv"
        if not proposals_path.exists():
            raise SalboxError(f"missing input proposal file {proposals_path}")
        input_proposals = read_proposals_csv(proposals_path)
        outcome = refine_image_proposals(
            image, contour, input_proposals, config.seg, config.refine, config.rank
        )
        return image_id, outcome.final, None
    except Exception as exc:  # per-image isolation, the run carries on
        return image_id, None, f"{type(exc).__name__}: {exc}"


def _image_path(images_dir: Path, image_id: str) -> Path:
    for suffix in IMAGE_SUFFIXES:
        candidate = images_dir / f"{image_id}{suffix}"
        if candidate.exists():
            return candidate
    raise SalboxError(f"no image file for id {image_id!r}")


def _pool_map(workers: int, fn: Callable, jobs: list) -> Iterable:
    if workers <= 1 or len(jobs) <= 1:
        return map(fn, jobs)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def run_refine(config: PipelineConfig) -> int:
    """Refine every image's proposal file. Returns a process exit code."""
    image_ids = list_image_ids(config.images_dir)
    if not image_ids:
        log.error("no images found under %s", config.images_dir)
        return 1
    config.output_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(config, image_id) for image_id in image_ids]
    failures = 0
    for image_id, final, error in _pool_map(config.workers, _refine_one, jobs):
        if error is not None:
            log.error("image %s failed: %s", image_id, error)
            failures += 1
            continue
        write_proposals_csv(config.output_dir / f"{image_id}.csv", final)
    log.info("refined %d/%d images", len(image_ids) - failures, len(image_ids))
    return 1 if failures else 0


def load_ground_truth(path: Path) -> GroundTruth:
    if path.is_dir():
        return load_voc_directory(path)
    return load_csv_annotations(path)


def _eval_ranks_one(
    args: tuple[Path, str, GroundTruth, tuple[float, ...], bool]
) -> tuple[int, dict]:
    proposals_dir, image_id, gt_one, thresholds, include_difficult = args
    path = proposals_dir / f"{image_id}.csv"
    plist = read_proposals_csv(path) if path.exists() else []
    return first_match_ranks(
        {image_id: plist}, gt_one, thresholds, include_difficult=include_difficult
    )


def run_eval(config: PipelineConfig) -> int:
    """Emit recall curves and AR tables for a directory of proposal files."""
    if config.annotations is None:
        log.error("eval needs an annotations path")
        return 1
    gt = load_ground_truth(config.annotations)
    if not gt:
        log.error("no ground truth found under %s", config.annotations)
        return 1
    proposals_dir = config.eval_proposals or config.output_dir
    out_dir = config.eval_out or (config.output_dir / "eval")
    out_dir.mkdir(parents=True, exist_ok=True)

    grid = iou_grid(step=config.ar_step)
    thresholds = tuple(sorted(set(grid) | set(config.curve_ious)))
    image_ids = sorted(gt)
    for image_id in image_ids:
        if not (proposals_dir / f"{image_id}.csv").exists():
            log.warning("no proposal file for %s, counting zero proposals", image_id)

    jobs = [
        (proposals_dir, image_id, {image_id: gt[image_id]}, thresholds,
         config.include_difficult)
        for image_id in image_ids
        if any(config.include_difficult or not a.difficult for a in gt[image_id])
    ]
    if not jobs:
        log.error("no countable ground-truth boxes under %s", config.annotations)
        return 1

    total = 0
    rank_lists: dict[float, list[np.ndarray]] = {tau: [] for tau in thresholds}
    for count, ranks in _pool_map(config.workers, _eval_ranks_one, jobs):
        total += count
        for tau, r in ranks.items():
            rank_lists[tau].append(r)
    all_ranks = {
        tau: (np.concatenate(rs) if rs else np.array([])) for tau, rs in rank_lists.items()
    }

    def recall(tau: float, n: int) -> float:
        return float(np.sum(all_ranks[tau] <= n)) / total

    for budget in config.budgets:
        curve = RecallCurve(
            xs=grid, recalls=tuple(recall(tau, budget) for tau in grid)
        )
        write_curve_csv(out_dir / f"recall_iou_{budget}.csv", curve, "iou")

    counts = tuple(range(1, config.max_count + 1))
    for tau in config.curve_ious:
        curve = RecallCurve(
            xs=tuple(float(n) for n in counts),
            recalls=tuple(recall(tau, n) for n in counts),
        )
        write_curve_csv(out_dir / f"recall_count_iou{tau:.2f}.csv", curve, "count")

    ar_curve = RecallCurve(
        xs=tuple(float(n) for n in counts),
        recalls=tuple(
            sum(recall(tau, n) for tau in grid) / len(grid) for n in counts
        ),
    )
    write_curve_csv(out_dir / "ar_count.csv", ar_curve, "count")

    for budget in config.budgets:
        ar = sum(recall(tau, budget) for tau in grid) / len(grid)
        log.info("AR @ %d proposals: %.4f", budget, ar)
        print(f"AR@{budget}: {ar:.4f}")
    return 0
