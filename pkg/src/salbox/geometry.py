"""Axis-aligned boxes on the half-open pixel grid, with area/IoU/clamp helpers.

Boxes cover the pixel set [x1, x2) x [y1, y2), so areas and overlaps are exact
integer arithmetic. Coordinates may be negative or exceed the raster before
clamping; `clamp_box` is the single place where bounds are enforced.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyAfterClamp, InvalidBox


@dataclass(frozen=True)
class BBox:
    """Half-open axis-aligned box: pixels with x1 <= x < x2 and y1 <= y < y2."""

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self) -> None:
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise InvalidBox(
                f"box ({self.x1},{self.y1},{self.x2},{self.y2}) has no pixels"
            )

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x1, self.y1, self.x2, self.y2)


def bbox_area(b: BBox) -> int:
    """Pixel count of the box, always positive."""
    return b.width * b.height


def bbox_iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0.0 when they share no pixel."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = bbox_area(a) + bbox_area(b) - inter
    return inter / union


def clamp_box(b: BBox, width: int, height: int) -> BBox:
    """Clip a box to the raster extent [0, width) x [0, height).

    Raises EmptyAfterClamp when the box lies fully outside the raster.
    """
    x1 = max(b.x1, 0)
    y1 = max(b.y1, 0)
    x2 = min(b.x2, width)
    y2 = min(b.y2, height)
    if x1 >= x2 or y1 >= y2:
        raise EmptyAfterClamp(
            f"box ({b.x1},{b.y1},{b.x2},{b.y2}) does not intersect a "
            f"{width}x{height} raster"
        )
    return BBox(x1, y1, x2, y2)
