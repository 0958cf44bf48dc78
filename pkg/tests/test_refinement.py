import numpy as np
import pytest

from salbox.contour import sobel_contour
from salbox.errors import EmptyAfterClamp
from salbox.geometry import BBox, bbox_iou
from salbox.raster import Raster
from salbox.refinement import (
    RefineParams,
    enlarge_window,
    refine_box,
    refine_windows,
    select_background_nodes,
)
from salbox.segmentation import SegParams, SuperpixelLabeling, segment_image


def make_labeling(labels):
    labels = np.asarray(labels, dtype=np.int32)
    return SuperpixelLabeling(labels, np.bincount(labels.ravel()))


def test_params_validation():
    with pytest.raises(ValueError):
        RefineParams(threshold=0.0)
    with pytest.raises(ValueError):
        RefineParams(threshold=1.0)
    with pytest.raises(ValueError):
        RefineParams(deltas=())
    with pytest.raises(ValueError):
        RefineParams(deltas=(5, 5))
    with pytest.raises(ValueError):
        RefineParams(deltas=(5, 1))


def test_default_deltas():
    p = RefineParams()
    assert p.deltas == (1, 5, 15, 25)
    assert p.max_window_index == 3


def test_enlarge_window():
    assert enlarge_window(BBox(10, 10, 20, 20), 5, 100, 100) == BBox(5, 5, 25, 25)
    assert enlarge_window(BBox(2, 2, 20, 20), 5, 100, 100) == BBox(0, 0, 25, 25)
    assert enlarge_window(BBox(0, 0, 100, 100), 7, 100, 100) == BBox(0, 0, 100, 100)


def test_background_single_superpixel():
    lab = make_labeling(np.zeros((6, 6), dtype=np.int32))
    assert select_background_nodes(lab, BBox(1, 1, 5, 5)) == {0}


def test_background_vertical_split():
    labels = np.zeros((6, 6), dtype=np.int32)
    labels[:, 3:] = 1
    lab = make_labeling(labels)
    assert select_background_nodes(lab, BBox(1, 1, 5, 5)) == {0, 1}


def test_background_one_pixel_window():
    labels = np.arange(9, dtype=np.int32).reshape(3, 3)
    lab = make_labeling(labels)
    assert select_background_nodes(lab, BBox(1, 1, 2, 2)) == {4}


def test_zero_contour_falls_back_to_input_box():
    lab = make_labeling(np.zeros((30, 30), dtype=np.int32))
    con = Raster(np.zeros((30, 30)))
    box = BBox(5, 5, 20, 20)
    out = refine_windows(box, lab, con, RefineParams())
    assert len(out) == 4
    assert all(w.fallback and w.box == box for w in out)


def test_everything_salient_tight_box():
    # 3x3 grid of 4x4 superpixels; the center is the only non-border node
    blocks = np.arange(9, dtype=np.int32).reshape(3, 3)
    labels = np.repeat(np.repeat(blocks, 4, axis=0), 4, axis=1)
    lab = make_labeling(labels)
    con = Raster(np.full((12, 12), 0.5))
    out = refine_windows(BBox(0, 0, 12, 12), lab, con, RefineParams(deltas=(0,)))
    assert len(out) == 1
    assert not out[0].fallback
    assert out[0].box == BBox(4, 4, 8, 8)


def test_synthetic_rectangle_recovery(rect_scene_100):
    lab = segment_image(rect_scene_100, SegParams())
    con = sobel_contour(rect_scene_100)
    out = refine_windows(BBox(25, 25, 70, 70), lab, con, RefineParams())
    target = BBox(30, 30, 60, 60)
    for w in out:
        assert abs(w.box.x1 - target.x1) <= 2
        assert abs(w.box.y1 - target.y1) <= 2
        assert abs(w.box.x2 - target.x2) <= 2
        assert abs(w.box.y2 - target.y2) <= 2


def test_refined_box_inside_window_and_count():
    rng = np.random.default_rng(4)
    img = Raster(rng.uniform(0, 1, (64, 64)))
    lab = segment_image(img, SegParams(min_size=20))
    con = sobel_contour(img)
    params = RefineParams()
    for box in (BBox(5, 9, 30, 40), BBox(0, 0, 64, 64), BBox(40, 40, 63, 63)):
        out = refine_windows(box, lab, con, params)
        assert len(out) == params.num_sizes
        for w in out:
            assert w.box.x1 >= w.window.x1 and w.box.y1 >= w.window.y1
            assert w.box.x2 <= w.window.x2 and w.box.y2 <= w.window.y2


def test_out_of_bounds_box_propagates():
    lab = make_labeling(np.zeros((10, 10), dtype=np.int32))
    con = Raster(np.zeros((10, 10)))
    with pytest.raises(EmptyAfterClamp):
        refine_windows(BBox(50, 50, 60, 60), lab, con, RefineParams())


def test_refine_box_wrapper_and_determinism(rect_scene_100):
    lab = segment_image(rect_scene_100, SegParams())
    con = sobel_contour(rect_scene_100)
    a = refine_box(BBox(25, 25, 70, 70), lab, con, RefineParams(), source=3)
    b = refine_box(BBox(25, 25, 70, 70), lab, con, RefineParams(), source=3)
    assert a == b
    assert [r.window_index for r in a] == [0, 1, 2, 3]
    assert all(r.source == 3 for r in a)
