#!/usr/bin/env python3
"""End-to-end experiment on synthetic scenes: refine jittered candidate boxes
and compare localization quality before and after refinement.

Prints recall at several IoU thresholds plus average recall, for the raw
jittered inputs and for the refined output, using the recorded rectangles as
ground truth.
"""

import argparse
import tempfile
import time
from pathlib import Path

import numpy as np

from salbox.cli import main as salbox_main
from salbox.evaluation import average_recall, load_csv_annotations, recall_at
from salbox.ranking import read_proposals_csv
from salbox.synthetic import random_scene, write_corpus


def collect(proposal_dir: Path, ids: list[str], n: int):
    return {i: read_proposals_csv(proposal_dir / f"{i}.csv")[:n] for i in ids}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=None,
                        help="where to put the corpus (default: temp dir)")
    parser.add_argument("--count", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--budget", type=int, default=5)
    args = parser.parse_args()

    workdir = args.workdir or Path(tempfile.mkdtemp(prefix="salbox_exp_"))
    rng = np.random.default_rng(args.seed)
    scenes = [random_scene(rng) for _ in range(args.count)]
    ids = write_corpus(workdir, scenes)
    print(f"corpus: {len(ids)} scenes under {workdir}")

    start = time.perf_counter()
    rc = salbox_main([
        "refine",
        "--images", str(workdir / "images"),
        "--proposals", str(workdir / "proposals"),
        "--output", str(workdir / "refined"),
        "--workers", str(args.workers),
    ])
    if rc != 0:
        raise SystemExit(rc)
    print(f"refined in {time.perf_counter() - start:.1f}s")

    gt = load_csv_annotations(workdir / "annotations.csv")
    thresholds = (0.5, 0.7, 0.8, 0.9)
    header = "method    " + "".join(f"R@{t:<6}" for t in thresholds) + "AR"
    print(header)
    for name, directory in (("input", workdir / "proposals"),
                            ("refined", workdir / "refined")):
        proposals = collect(directory, ids, args.budget)
        row = f"{name:<10}"
        for tau in thresholds:
            row += f"{recall_at(proposals, gt, tau):<8.3f}"
        row += f"{average_recall(proposals, gt, args.budget):.3f}"
        print(row)


if __name__ == "__main__":
    main()
