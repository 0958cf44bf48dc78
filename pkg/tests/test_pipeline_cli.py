import numpy as np
import pytest

from salbox.cli import main
from salbox.contour import sobel_contour
from salbox.geometry import BBox, bbox_iou
from salbox.pipeline import (
    PipelineConfig,
    refine_image_proposals,
)
from salbox.ranking import RankParams, ScoredProposal, read_proposals_csv
from salbox.raster import save_pgm
from salbox.refinement import RefineParams
from salbox.segmentation import SegParams
from salbox.synthetic import random_scene, write_corpus


@pytest.fixture
def corpus(tmp_path):
    rng = np.random.default_rng(123)
    scenes = [random_scene(rng, size=96, margin=16, side_range=(34, 56)) for _ in range(3)]
    ids = write_corpus(tmp_path, scenes)
    return tmp_path, ids, scenes


def refine_args(root, out, extra=()):
    return [
        "refine",
        "--images", str(root / "images"),
        "--proposals", str(root / "proposals"),
        "--output", str(out),
        *extra,
    ]


def test_refine_writes_ranked_files(corpus):
    root, ids, scenes = corpus
    assert main(refine_args(root, root / "out")) == 0
    for sid, scene in zip(ids, scenes):
        out = read_proposals_csv(root / "out" / f"{sid}.csv")
        assert 1 <= len(out) <= 1000
        assert all(a.score >= b.score for a, b in zip(out, out[1:]))
        best = max(bbox_iou(p.box, scene.target) for p in out)
        assert best >= 0.9


def test_refined_set_expansion_and_budget(corpus):
    root, ids, _ = corpus
    # ten input boxes for the first image
    sid = ids[0]
    lines = ["x1,y1,x2,y2,score"]
    for i in range(10):
        lines.append(f"{2 + i},{2 + i},{40 + i},{40 + i},{10 - i}")
    (root / "proposals" / f"{sid}.csv").write_text("\n".join(lines) + "\n")
    assert main(refine_args(root, root / "out2", ["--max-proposals", "12"])) == 0
    out = read_proposals_csv(root / "out2" / f"{sid}.csv")
    assert len(out) <= 12


def test_empty_input_gives_empty_output(corpus):
    root, ids, _ = corpus
    for sid in ids:
        (root / "proposals" / f"{sid}.csv").write_text("x1,y1,x2,y2,score\n")
    assert main(refine_args(root, root / "out3")) == 0
    for sid in ids:
        assert read_proposals_csv(root / "out3" / f"{sid}.csv") == []


def test_missing_proposal_file_partial_failure(corpus):
    root, ids, _ = corpus
    (root / "proposals" / f"{ids[0]}.csv").unlink()
    assert main(refine_args(root, root / "out4")) == 1
    assert not (root / "out4" / f"{ids[0]}.csv").exists()
    assert (root / "out4" / f"{ids[1]}.csv").exists()


def test_worker_determinism(corpus):
    root, ids, _ = corpus
    assert main(refine_args(root, root / "w1", ["--workers", "1"])) == 0
    assert main(refine_args(root, root / "w2", ["--workers", "2"])) == 0
    for sid in ids:
        a = (root / "w1" / f"{sid}.csv").read_bytes()
        b = (root / "w2" / f"{sid}.csv").read_bytes()
        assert a == b


def test_contour_file_modes(corpus):
    root, ids, _ = corpus
    contours = root / "contours"
    contours.mkdir()
    # files mode fails without maps; auto falls back to the built-in gradient
    assert main(refine_args(root, root / "cf", ["--contour-source", "files",
                                                "--contours", str(contours)])) == 1
    assert main(refine_args(root, root / "ca", ["--contour-source", "auto",
                                                "--contours", str(contours)])) == 0
    # supplying the gradient map as a file reproduces the sobel run exactly
    from salbox.raster import load_image

    for sid in ids:
        img = load_image(root / "images" / f"{sid}.pgm")
        save_pgm(sobel_contour(img), contours / f"{sid}.pgm", maxval=65535)
    assert main(refine_args(root, root / "cs", [])) == 0
    assert main(refine_args(root, root / "cf2", ["--contour-source", "files",
                                                 "--contours", str(contours)])) == 0
    for sid in ids:
        direct = read_proposals_csv(root / "cs" / f"{sid}.csv")
        via_file = read_proposals_csv(root / "cf2" / f"{sid}.csv")
        assert [p.box for p in direct] == [p.box for p in via_file]


def test_eval_ground_truth_as_proposals(corpus, capsys):
    root, ids, scenes = corpus
    gt_dir = root / "gtprops"
    gt_dir.mkdir()
    for sid, scene in zip(ids, scenes):
        t = scene.target
        (gt_dir / f"{sid}.csv").write_text(
            f"x1,y1,x2,y2,score\n{t.x1},{t.y1},{t.x2},{t.y2},1.0\n"
        )
    rc = main([
        "eval",
        "--images", str(root / "images"),
        "--proposals", str(root / "proposals"),
        "--output", str(gt_dir),
        "--annotations", str(root / "annotations.csv"),
        "--budgets", "10",
        "--max-count", "5",
        "--eval-out", str(root / "eval"),
    ])
    assert rc == 0
    text = (root / "eval" / "recall_iou_10.csv").read_text()
    rows = [line.split(",") for line in text.splitlines()[1:]]
    assert all(float(r[1]) == 1.0 for r in rows)
    ar = (root / "eval" / "ar_count.csv").read_text().splitlines()[1:]
    assert all(float(line.split(",")[1]) == 1.0 for line in ar)
    assert "AR@10: 1.0000" in capsys.readouterr().out


def test_eval_emits_all_curves(corpus):
    root, ids, scenes = corpus
    assert main(refine_args(root, root / "out5")) == 0
    rc = main([
        "eval",
        "--images", str(root / "images"),
        "--proposals", str(root / "proposals"),
        "--output", str(root / "out5"),
        "--annotations", str(root / "annotations.csv"),
        "--budgets", "5,10",
        "--curve-ious", "0.7,0.8,0.9",
        "--max-count", "20",
    ])
    assert rc == 0
    eval_dir = root / "out5" / "eval"
    names = {p.name for p in eval_dir.iterdir()}
    assert names == {
        "recall_iou_5.csv",
        "recall_iou_10.csv",
        "recall_count_iou0.70.csv",
        "recall_count_iou0.80.csv",
        "recall_count_iou0.90.csv",
        "ar_count.csv",
    }
    count_curve = (eval_dir / "recall_count_iou0.70.csv").read_text().splitlines()
    assert len(count_curve) == 21  # header + counts 1..20


def test_config_file_and_flag_override(corpus):
    root, ids, _ = corpus
    cfg = root / "run.cfg"
    cfg.write_text(
        "# demo config\n"
        f"images = {root / 'images'}\n"
        f"proposals = {root / 'proposals'}\n"
        f"output = {root / 'cfg_out'}\n"
        "max_proposals = 7\n"
        "workers = 1\n"
    )
    assert main(["refine", "--config", str(cfg)]) == 0
    assert (root / "cfg_out" / f"{ids[0]}.csv").exists()
    # flag wins over file
    assert main(["refine", "--config", str(cfg), "--output", str(root / "cfg_out2")]) == 0
    assert (root / "cfg_out2" / f"{ids[0]}.csv").exists()


def test_config_errors_exit_two(corpus, tmp_path):
    root, _, _ = corpus
    assert main(refine_args(root, root / "x", ["--images", "/nonexistent"])) == 2
    assert main(refine_args(root, root / "x", ["--deltas", "5,1"])) == 2
    assert main(refine_args(root, root / "x", ["--lambda", "1.5"])) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key = 3\n")
    assert main(["refine", "--config", str(bad)]) == 2
    assert main([
        "eval",
        "--images", str(root / "images"),
        "--proposals", str(root / "proposals"),
        "--output", str(root / "nonexistent_out"),
        "--annotations", str(root / "annotations.csv"),
    ]) == 2


def test_saliency_dump(corpus):
    root, ids, _ = corpus
    rc = main([
        "saliency-dump",
        "--images", str(root / "images"),
        "--proposals", str(root / "proposals"),
        "--output", str(root / "maps"),
        "--image", ids[0],
        "--box", "0",
        "--labels",
    ])
    assert rc == 0
    produced = sorted(p.name for p in (root / "maps").iterdir())
    assert f"{ids[0]}_labels.png" in produced
    for m in range(4):
        assert f"{ids[0]}_box0_win{m}.png" in produced


def test_refine_image_proposals_fallback_keeps_inputs():
    # flat image: no contour evidence anywhere, every window falls back
    from salbox.raster import Raster

    img = Raster(np.full((40, 40), 0.5))
    contour = sobel_contour(img)
    inputs = [
        ScoredProposal(BBox(2, 2, 20, 20), 2.0, "input"),
        ScoredProposal(BBox(22, 22, 38, 38), 1.0, "input"),
    ]
    out = refine_image_proposals(
        img, contour, inputs, SegParams(), RefineParams(), RankParams()
    )
    final_boxes = [p.box for p in out.final]
    assert BBox(2, 2, 20, 20) in final_boxes
    assert BBox(22, 22, 38, 38) in final_boxes
    assert len(out.final) >= len(inputs)
