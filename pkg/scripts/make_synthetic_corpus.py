#!/usr/bin/env python3
"""Generate a synthetic rectangle corpus ready for the refine/eval CLI.

Writes images/, proposals/, annotations.csv, and a run.cfg pointing at them,
so `salbox refine --config <dir>/run.cfg` works immediately afterwards.
"""

import argparse
from pathlib import Path

import numpy as np

from salbox.synthetic import random_scene, write_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--count", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--margin", type=int, default=20)
    parser.add_argument("--min-side", type=int, default=40)
    parser.add_argument("--max-side", type=int, default=80)
    parser.add_argument("--iou-lo", type=float, default=0.5)
    parser.add_argument("--iou-hi", type=float, default=0.7)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    scenes = [
        random_scene(
            rng,
            size=args.size,
            margin=args.margin,
            side_range=(args.min_side, args.max_side),
            iou_range=(args.iou_lo, args.iou_hi),
        )
        for _ in range(args.count)
    ]
    ids = write_corpus(args.out_dir, scenes)

    cfg = args.out_dir / "run.cfg"
    cfg.write_text(
        f"images = {args.out_dir / 'images'}\n"
        f"proposals = {args.out_dir / 'proposals'}\n"
        f"output = {args.out_dir / 'refined'}\n"
        f"annotations = {args.out_dir / 'annotations.csv'}\n"
        "contour_source = sobel\n"
        "budgets = 1,5,10\n"
        "max_count = 10\n"
    )
    print(f"wrote {len(ids)} scenes under {args.out_dir}")
    print(f"next: salbox refine --config {cfg}")
    print(f"      salbox eval --config {cfg}")


if __name__ == "__main__":
    main()
