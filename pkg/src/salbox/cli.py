"""Command-line front end: refine, eval, and saliency-dump subcommands.

Configuration is a plain key = value text file; every key also exists as a
command-line flag, and flags win over the file. Exit codes: 0 success,
1 partial failure (some image failed), 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, SalboxError
from .pipeline import (
    PipelineConfig,
    contour_for_image,
    run_eval,
    run_refine,
    _image_path,
)
from .ranking import RankParams, read_proposals_csv
from .raster import load_image, save_png_gray
from .refinement import RefineParams, refine_windows
from .saliency import render_window_saliency
from .segmentation import SegParams, save_label_image, segment_image

log = logging.getLogger("salbox")

_PATH_KEYS = ("images", "proposals", "output", "annotations", "contours",
              "eval_proposals", "eval_out")
_VALUE_KEYS = {
    "contour_source": str,
    "sigma": float,
    "k": float,
    "min_size": int,
    "threshold": float,
    "deltas": str,
    "lambda": float,
    "nms_iou": float,
    "max_proposals": int,
    "budgets": str,
    "curve_ious": str,
    "max_count": int,
    "ar_step": float,
    "include_difficult": str,
    "workers": int,
}


def _parse_config_file(path: Path) -> dict[str, str]:
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    values: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PATH_KEYS and key not in _VALUE_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(f) for f in text.split(",") if f.strip())
    except ValueError as exc:
        raise ConfigError(f"bad {what} list {text!r}") from exc


def _float_list(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(f) for f in text.split(",") if f.strip())
    except ValueError as exc:
        raise ConfigError(f"bad {what} list {text!r}") from exc


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Merge defaults, config file, and flags into a validated config."""
    raw: dict[str, str] = {}
    if args.config is not None:
        raw.update(_parse_config_file(Path(args.config)))
    for key in (*_PATH_KEYS, *_VALUE_KEYS):
        flag_value = getattr(args, key.replace("-", "_"), None)
        if flag_value is not None:
            raw[key] = str(flag_value)

    for required in ("images", "proposals", "output"):
        if required not in raw:
            raise ConfigError(f"missing required setting {required!r}")

    def path_of(key: str) -> Path | None:
        return Path(raw[key]) if key in raw else None

    try:
        seg = SegParams(
            sigma=float(raw.get("sigma", 0.8)),
            k=float(raw.get("k", 100.0)),
            min_size=int(raw.get("min_size", 100)),
        )
        refine = RefineParams(
            threshold=float(raw.get("threshold", 0.01)),
            deltas=_int_list(raw.get("deltas", "1,5,15,25"), "deltas"),
        )
        rank = RankParams(
            area_exponent=float(raw.get("lambda", 0.9)),
            nms_iou=float(raw.get("nms_iou", 0.9)),
            max_proposals=int(raw.get("max_proposals", 1000)),
        )
        config = PipelineConfig(
            images_dir=Path(raw["images"]),
            proposals_dir=Path(raw["proposals"]),
            output_dir=Path(raw["output"]),
            annotations=path_of("annotations"),
            contour_dir=path_of("contours"),
            contour_source=raw.get("contour_source", "sobel"),
            seg=seg,
            refine=refine,
            rank=rank,
            budgets=_int_list(raw.get("budgets", "500,1000,2000"), "budgets"),
            curve_ious=_float_list(raw.get("curve_ious", "0.7,0.8,0.9"), "curve_ious"),
            max_count=int(raw.get("max_count", 1000)),
            ar_step=float(raw.get("ar_step", 0.05)),
            include_difficult=_bool(raw.get("include_difficult", "false")),
            workers=int(raw.get("workers", 1)),
            eval_proposals=path_of("eval_proposals"),
            eval_out=path_of("eval_out"),
        )
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc)) from exc

    if config.contour_source not in ("sobel", "files", "auto"):
        raise ConfigError(f"contour_source must be sobel|files|auto, "
                          f"got {config.contour_source!r}")
    if config.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {config.workers}")
    if config.max_count < 1:
        raise ConfigError(f"max_count must be >= 1, got {config.max_count}")
    return config


def _check_paths(config: PipelineConfig, command: str) -> None:
    if command in ("refine", "saliency-dump"):
        if not config.images_dir.is_dir():
            raise ConfigError(f"images dir {config.images_dir} does not exist")
        if not config.proposals_dir.is_dir():
            raise ConfigError(f"proposals dir {config.proposals_dir} does not exist")
        if config.contour_source == "files":
            if config.contour_dir is None or not config.contour_dir.is_dir():
                raise ConfigError("contour_source=files needs an existing contours dir")
    if command == "eval":
        if config.annotations is None or not config.annotations.exists():
            raise ConfigError("eval needs an existing annotations path")
        proposals = config.eval_proposals or config.output_dir
        if not proposals.is_dir():
            raise ConfigError(f"proposal dir {proposals} does not exist")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--images", help="directory of input images")
    p.add_argument("--proposals", help="directory of input proposal CSVs")
    p.add_argument("--output", help="directory for refined proposal CSVs")
    p.add_argument("--annotations", help="VOC XML directory or CSV ground truth")
    p.add_argument("--contours", help="directory of precomputed contour maps")
    p.add_argument("--contour-source", dest="contour_source",
                   choices=("sobel", "files", "auto"),
                   help="where contour maps come from (default sobel)")
    p.add_argument("--sigma", type=float, help="segmentation pre-smoothing")
    p.add_argument("--k", type=float, help="segmentation scale of observation")
    p.add_argument("--min-size", dest="min_size", type=int,
                   help="minimum superpixel area in pixels")
    p.add_argument("--threshold", type=float, help="saliency binarization threshold")
    p.add_argument("--deltas", help="comma-separated window margins, e.g. 1,5,15,25")
    p.add_argument("--lambda", dest="lambda", type=float,
                   help="area exponent of the ranking score")
    p.add_argument("--nms-iou", dest="nms_iou", type=float, help="NMS IoU threshold")
    p.add_argument("--max-proposals", dest="max_proposals", type=int,
                   help="output budget per image")
    p.add_argument("--budgets", help="comma-separated eval budgets, e.g. 500,1000,2000")
    p.add_argument("--curve-ious", dest="curve_ious",
                   help="IoU thresholds for recall-vs-count curves")
    p.add_argument("--max-count", dest="max_count", type=int,
                   help="largest proposal count in the sweep")
    p.add_argument("--ar-step", dest="ar_step", type=float,
                   help="IoU grid step for average recall")
    p.add_argument("--include-difficult", dest="include_difficult",
                   nargs="?", const="true",
                   help="count difficult ground-truth boxes too")
    p.add_argument("--workers", type=int, help="process pool size")
    p.add_argument("--eval-proposals", dest="eval_proposals",
                   help="proposal dir to evaluate (default: the output dir)")
    p.add_argument("--eval-out", dest="eval_out",
                   help="directory for curve CSVs (default: <output>/eval)")


def _cmd_saliency_dump(config: PipelineConfig, args: argparse.Namespace) -> int:
    image_id = args.image
    try:
        image = load_image(_image_path(config.images_dir, image_id))
        contour = contour_for_image(config, image_id, image)
        proposals = read_proposals_csv(config.proposals_dir / f"{image_id}.csv")
    except SalboxError as exc:
        log.error("%s", exc)
        return 1
    labeling = segment_image(image, config.seg)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    if args.labels:
        save_label_image(labeling, config.output_dir / f"{image_id}_labels.png")
    indexes = range(len(proposals)) if args.box is None else [args.box]
    failures = 0
    for j in indexes:
        if not (0 <= j < len(proposals)):
            log.error("box index %d out of range (%d proposals)", j, len(proposals))
            failures += 1
            continue
        try:
            windows = refine_windows(
                proposals[j].box, labeling, contour, config.refine
            )
        except SalboxError as exc:
            log.error("box %d: %s", j, exc)
            failures += 1
            continue
        for w in windows:
            out = config.output_dir / f"{image_id}_box{j}_win{w.window_index}.png"
            save_png_gray(
                render_window_saliency(labeling, w.saliency, w.window), out
            )
    return 1 if failures else 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="salbox",
        description="Refine and re-rank object proposal boxes with "
                    "contour-driven geodesic saliency.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_refine = sub.add_parser("refine", help="refine per-image proposal files")
    _add_common_args(p_refine)

    p_eval = sub.add_parser("eval", help="recall curves and AR tables")
    _add_common_args(p_eval)

    p_dump = sub.add_parser("saliency-dump", help="write per-window saliency PNGs")
    _add_common_args(p_dump)
    p_dump.add_argument("--image", required=True, help="image id (file stem)")
    p_dump.add_argument("--box", type=int, help="proposal index; default all")
    p_dump.add_argument("--labels", action="store_true",
                        help="also dump the superpixel labeling as a color PNG")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = build_config(args)
        _check_paths(config, args.command)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2

    if args.command == "refine":
        return run_refine(config)
    if args.command == "eval":
        return run_eval(config)
    return _cmd_saliency_dump(config, args)


if __name__ == "__main__":
    sys.exit(main())
