"""Images, tile geometry, PGM/PPM I/O, and synthetic scene generation.

Pixel data lives in a numpy uint8 array of shape (height, width,
components) — row-major, component-interleaved. Only binary portable
graymap/pixmap files (P5/P6, maxval 255) are read and written.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass

import numpy as np

from . import rng


class ImageIOError(ValueError):
    """A portable image or ground-truth file failed to parse or serialize."""


class Image:
    """An 8-bit raster with 1 or 3 interleaved components.

    Accepts a 2-D (grayscale) or 3-D (h, w, c) uint8-compatible array;
    grayscale input is normalized to shape (h, w, 1).
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError("pixel samples must be integers")
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("pixel samples out of 8-bit range")
            arr = arr.astype(np.uint8)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"expected 2-D or 3-D pixel array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ValueError(f"degenerate image shape {arr.shape}")
        self.pixels = np.ascontiguousarray(arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def components(self) -> int:
        return self.pixels.shape[2]

    @property
    def samples(self) -> bytes:
        """Raw interleaved sample bytes."""
        return self.pixels.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(
            self.pixels, other.pixels
        )

    def __hash__(self):
        return hash((self.pixels.shape, self.samples))

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height}x{self.components})"


@dataclass(frozen=True)
class TileGrid:
    """Fixed-size tiling of an image; edge tiles are clipped."""

    tile_w: int
    tile_h: int
    tiles_x: int
    tiles_y: int

    def __post_init__(self):
        if self.tile_w < 1 or self.tile_h < 1:
            raise ValueError("tile dimensions must be >= 1")
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tile counts must be >= 1")

    @classmethod
    def for_image(cls, width: int, height: int, tile_w: int, tile_h: int) -> "TileGrid":
        if width < 1 or height < 1:
            raise ValueError("image dimensions must be >= 1")
        if tile_w < 1 or tile_h < 1:
            raise ValueError("tile dimensions must be >= 1")
        return cls(
            tile_w=tile_w,
            tile_h=tile_h,
            tiles_x=-(-width // tile_w),
            tiles_y=-(-height // tile_h),
        )

    @property
    def tile_count(self) -> int:
        return self.tiles_x * self.tiles_y


@dataclass(frozen=True)
class GroundTruthBox:
    """One true object in full-resolution pixel coordinates."""

    object_id: int
    class_id: int
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"degenerate ground-truth box {self.w}x{self.h}")


def tile_bounds(
    grid: TileGrid, index: int, image_w: int, image_h: int
) -> tuple[int, int, int, int]:
    """(x, y, w, h) of a tile, clipped to the image.

    Tile indices are row-major in [0, tile_count).
    """
    if not 0 <= index < grid.tile_count:
        raise IndexError(f"tile index {index} out of range 0..{grid.tile_count - 1}")
    row, col = divmod(index, grid.tiles_x)
    x = col * grid.tile_w
    y = row * grid.tile_h
    return x, y, min(grid.tile_w, image_w - x), min(grid.tile_h, image_h - y)


_PNM_HEADER = re.compile(rb"^(P[56])\s+(\d+)\s+(\d+)\s+(\d+)\s")


def load_image(path) -> Image:
    """Read a binary PGM (P5) or PPM (P6) file with maxval 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    m = _PNM_HEADER.match(data)
    if m is None:
        if data[:2] in (b"P5", b"P6"):
            raise ImageIOError(f"{path}: malformed PNM header")
        raise ImageIOError(f"{path}: not a binary PGM/PPM (P5/P6) file")
    magic, width, height, maxval = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    if maxval != 255:
        raise ImageIOError(f"{path}: unsupported maxval {maxval} (must be 255)")
    if width < 1 or height < 1:
        raise ImageIOError(f"{path}: degenerate dimensions {width}x{height}")
    components = 1 if magic == b"P5" else 3
    payload = data[m.end():]
    expected = width * height * components
    if len(payload) < expected:
        raise ImageIOError(
            f"{path}: truncated payload: expected {expected} bytes, found {len(payload)}"
        )
    if len(payload) > expected:
        raise ImageIOError(f"{path}: trailing data after pixel payload")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, components)
    return Image(arr)


def save_image(img: Image, path) -> None:
    """Write as binary PGM/PPM; load_image(save_image(img)) == img."""
    if img.components == 1:
        magic = b"P5"
    elif img.components == 3:
        magic = b"P6"
    else:
        raise ImageIOError(
            f"unsupported component count {img.components} (PGM/PPM need 1 or 3)"
        )
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.samples)


_GT_HEADER = ["object_id", "class_id", "x", "y", "w", "h"]


def save_ground_truth(path, boxes: list[GroundTruthBox]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_GT_HEADER)
        for b in boxes:
            writer.writerow([b.object_id, b.class_id, b.x, b.y, b.w, b.h])


def load_ground_truth(path) -> list[GroundTruthBox]:
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ImageIOError(f"{path}: empty ground-truth file") from None
        if header != _GT_HEADER:
            raise ImageIOError(f"{path}: bad ground-truth header {header!r}")
        boxes = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vals = [int(v) for v in row]
                boxes.append(GroundTruthBox(*vals))
            except (ValueError, TypeError) as exc:
                raise ImageIOError(f"{path}: line {lineno}: {exc}") from None
    return boxes


def generate_scene(
    seed: int,
    width: int,
    height: int,
    object_count: int,
    size_range: tuple[int, int] = (24, 64),
) -> tuple[Image, list[GroundTruthBox]]:
    """Deterministic synthetic three-channel scene with ground truth.

    The background is per-pixel high-contrast noise (each channel flips
    between 0 and 255 independently), which keeps the encoded payload
    from collapsing and exercises every resolution level. Objects are
    solid axis-aligned rectangles whose channel values (24 / 231) never
    occur in the background. Output depends only on the arguments: the
    same bytes on every run and platform.
    """
    if width < 1 or height < 1:
        raise ValueError("scene dimensions must be >= 1")
    if object_count < 0:
        raise ValueError("object_count must be >= 0")
    lo, hi = size_range
    if not 1 <= lo <= hi:
        raise ValueError(f"bad size range {size_range}")
    if hi > width or hi > height:
        raise ValueError(
            f"object size {hi} exceeds image dimensions {width}x{height}"
        )

    base = rng.mix64(rng.stream_key(seed, rng.DOMAIN_PIXEL))
    noise = rng.mix64_array(np.arange(height * width, dtype=np.uint64) ^ np.uint64(base))
    pix = np.empty((height * width, 3), dtype=np.uint8)
    for c in range(3):  # channel c uses bit c of the per-pixel hash
        np.multiply((noise >> np.uint64(c)) & np.uint64(1), 255, out=pix[:, c], casting="unsafe")
    pix = pix.reshape(height, width, 3)

    boxes = []
    for k in range(object_count):
        st = rng.Stream(seed, rng.DOMAIN_OBJECT, k)
        bw = lo + st.below(hi - lo + 1)
        bh = lo + st.below(hi - lo + 1)
        x = st.below(width - bw + 1)
        y = st.below(height - bh + 1)
        class_id = st.below(3)
        color = [231 if st.below(2) else 24 for _ in range(3)]
        pix[y : y + bh, x : x + bw] = color
        boxes.append(GroundTruthBox(object_id=k, class_id=class_id, x=x, y=y, w=bw, h=bh))
    return Image(pix), boxes
