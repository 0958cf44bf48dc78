"""Single-channel rasters and grayscale image I/O.

Images are loaded into float64 grids scaled to [0, 1] by the source format's
maximum sample value. Color inputs are reduced to luminance with the standard
0.299/0.587/0.114 weights. PNM files (P2/P3/P5/P6, maxval up to 65535) are
parsed directly; PNG goes through Pillow.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ParseError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_PNM_MAGICS = {b"P2", b"P3", b"P5", b"P6"}


@dataclass(frozen=True, eq=False)
class Raster:
    """Immutable row-major scalar grid with non-negative values."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"raster needs a 2-d grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or float(arr.min()) < 0.0:
            raise ValueError("raster values must be finite and >= 0")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Collapse an (h, w, 3) array to one channel."""
    r, g, b = LUMA_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def load_image(path: str | Path) -> Raster:
    """Load a PNG or PNM image as a [0, 1] luminance raster."""
    samples, maxval = _read_any(Path(path))
    scaled = samples / float(maxval)
    if scaled.ndim == 3:
        scaled = luminance(scaled)
    return Raster(scaled)


def load_grayscale(path: str | Path) -> Raster:
    """Load a grayscale PNG or PNM image, rejecting color content."""
    samples, maxval = _read_any(Path(path))
    if samples.ndim != 2:
        raise ParseError(f"{path}: expected a single-channel image")
    return Raster(samples / float(maxval))


def _read_any(path: Path) -> tuple[np.ndarray, int]:
    try:
        head = path.open("rb").read(2)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if head in _PNM_MAGICS:
        return _read_pnm(path)
    return _read_png(path)


def _read_png(path: Path) -> tuple[np.ndarray, int]:
    try:
        with Image.open(path) as img:
            mode = img.mode
            if mode == "L":
                return np.asarray(img, dtype=np.float64), 255
            if mode.startswith("I"):
                # 16-bit grayscale PNG; Pillow exposes it as I or I;16.
                return np.asarray(img, dtype=np.float64), 65535
            rgb = img.convert("RGB")
            return np.asarray(rgb, dtype=np.float64), 255
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ParseError(f"{path}: not a readable image ({exc})") from exc


def _read_pnm(path: Path) -> tuple[np.ndarray, int]:
    data = path.read_bytes()
    magic = data[:2].decode("ascii", errors="replace")
    try:
        header, offset = _parse_pnm_header(data)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: bad PNM header ({exc})") from exc
    width, height, maxval = header
    channels = 3 if magic in ("P3", "P6") else 1
    count = width * height * channels
    if magic in ("P2", "P3"):
        fields = data[offset:].split()
        if len(fields) < count:
            raise ParseError(f"{path}: truncated ASCII PNM payload")
        try:
            flat = np.array([int(f) for f in fields[:count]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{path}: non-numeric PNM sample") from exc
    else:
        nbytes = count * (2 if maxval > 255 else 1)
        payload = data[offset : offset + nbytes]
        if len(payload) < nbytes:
            raise ParseError(f"{path}: truncated binary PNM payload")
        dtype = ">u2" if maxval > 255 else np.uint8
        flat = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    if flat.max(initial=0.0) > maxval:
        raise ParseError(f"{path}: sample exceeds declared maxval {maxval}")
    if channels == 3:
        return flat.reshape(height, width, 3), maxval
    return flat.reshape(height, width), maxval


def _parse_pnm_header(data: bytes) -> tuple[tuple[int, int, int], int]:
    """Return ((width, height, maxval), payload offset). Handles # comments."""
    pos = 2  # past magic
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
            continue
        m = re.match(rb"\d+", data[pos:])
        if not m:
            raise ValueError("missing numeric header field")
        fields.append(int(m.group()))
        pos += m.end()
    width, height, maxval = fields
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise ValueError(f"bad dimensions {width}x{height} maxval {maxval}")
    # exactly one whitespace byte separates the header from binary payload
    return (width, height, maxval), pos + 1


def save_pgm(raster: Raster, path: str | Path, maxval: int = 255) -> None:
    """Write a [0, 1] raster as binary PGM, quantized to maxval levels."""
    if not (0 < maxval < 65536):
        raise ValueError(f"maxval {maxval} out of range")
    q = np.rint(np.clip(raster.values, 0.0, 1.0) * maxval)
    payload = q.astype(">u2" if maxval > 255 else np.uint8).tobytes()
    header = f"P5\n{raster.width} {raster.height}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + payload)


def save_png_gray(values01: np.ndarray, path: str | Path) -> None:
    """Write a [0, 1] array as an 8-bit grayscale PNG."""
    q = np.rint(np.clip(values01, 0.0, 1.0) * 255).astype(np.uint8)
    Image.fromarray(q, mode="L").save(Path(path))


def save_png_rgb(rgb_u8: np.ndarray, path: str | Path) -> None:
    """Write an (h, w, 3) uint8 array as an RGB PNG."""
    Image.fromarray(np.ascontiguousarray(rgb_u8, dtype=np.uint8), mode="RGB").save(
        Path(path)
    )
