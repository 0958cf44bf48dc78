import pytest
from hypothesis import given, strategies as st

from salbox.errors import EmptyAfterClamp, InvalidBox
from salbox.geometry import BBox, bbox_area, bbox_iou, clamp_box


@st.composite
def boxes(draw):
    x1 = draw(st.integers(min_value=0, max_value=40))
    y1 = draw(st.integers(min_value=0, max_value=40))
    w = draw(st.integers(min_value=1, max_value=30))
    h = draw(st.integers(min_value=1, max_value=30))
    return BBox(x1, y1, x1 + w, y1 + h)


def test_area_values():
    assert bbox_area(BBox(0, 0, 10, 10)) == 100
    assert bbox_area(BBox(0, 0, 1, 1)) == 1
    assert bbox_area(BBox(3, 5, 13, 25)) == 200


def test_degenerate_box_rejected():
    with pytest.raises(InvalidBox):
        BBox(5, 0, 5, 10)
    with pytest.raises(InvalidBox):
        BBox(0, 7, 10, 3)


def test_iou_identical_is_one():
    b = BBox(2, 3, 11, 17)
    assert bbox_iou(b, b) == 1.0


def test_iou_disjoint_is_zero():
    assert bbox_iou(BBox(0, 0, 5, 5), BBox(5, 0, 10, 5)) == 0.0
    assert bbox_iou(BBox(0, 0, 5, 5), BBox(20, 20, 30, 30)) == 0.0


def test_iou_half_overlap_fixture():
    # intersection 50, union 150
    assert bbox_iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)) == pytest.approx(1 / 3)


@given(boxes(), boxes())
def test_iou_symmetric_and_bounded(a, b):
    iou = bbox_iou(a, b)
    assert iou == bbox_iou(b, a)
    assert 0.0 <= iou <= 1.0
    assert (iou == 1.0) == (a == b)


@given(boxes(), boxes())
def test_iou_positive_iff_shared_pixel(a, b):
    shares = min(a.x2, b.x2) > max(a.x1, b.x1) and min(a.y2, b.y2) > max(a.y1, b.y1)
    assert (bbox_iou(a, b) > 0) == shares


def test_clamp_fixtures():
    assert clamp_box(BBox(-5, -5, 10, 10), 100, 100) == BBox(0, 0, 10, 10)
    assert clamp_box(BBox(90, 90, 120, 120), 100, 100) == BBox(90, 90, 100, 100)
    with pytest.raises(EmptyAfterClamp):
        clamp_box(BBox(200, 200, 300, 300), 100, 100)


@given(boxes())
def test_clamp_idempotent(b):
    once = clamp_box(b, 50, 50)
    assert clamp_box(once, 50, 50) == once
