"""Binary PGM (P5) reading/writing and box tiling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FormatError

_WHITESPACE = b" \t\n\r\v\f"


@dataclass
class ImageGrid:
    """8-bit grayscale raster; ``pixels`` has shape ``(height, width)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise DomainError(f"image must be a non-empty 2D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if not np.all(np.isfinite(px)) or px.min() < 0 or px.max() > 255 or np.any(px != np.round(px)):
                raise DomainError("pixel values must be integers in [0, 255]")
            px = px.astype(np.uint8)
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.all(self.pixels == other.pixels))


@dataclass(frozen=True)
class BoxLayout:
    box_side: int
    rows: int
    cols: int
    pad_right: int
    pad_bottom: int

    @property
    def width(self) -> int:
        """Original (unpadded) width."""
        return self.cols * self.box_side - self.pad_right

    @property
    def height(self) -> int:
        return self.rows * self.box_side - self.pad_bottom

    @classmethod
    def for_image(cls, width: int, height: int, box_side: int) -> "BoxLayout":
        if box_side < 1:
            raise DomainError(f"box side must be >= 1, got {box_side}")
        rows = -(-height // box_side)
        cols = -(-width // box_side)
        return cls(box_side, rows, cols, cols * box_side - width, rows * box_side - height)


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # skips whitespace and '#' comments, returns (token, position after it)
    while pos < len(data):
        ch = data[pos:pos + 1]
        if ch in _WHITESPACE:
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise FormatError("unterminated comment in PGM header", pos)
            pos = end + 1
        else:
            break
    start = pos
    while pos < len(data) and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FormatError("truncated PGM header", pos)
    return data[start:pos], pos


def _read_int(data: bytes, pos: int, what: str) -> tuple[int, int]:
    token, end = _read_token(data, pos)
    if not token.isdigit():
        raise FormatError(f"bad {what} {token!r} in PGM header", end - len(token))
    return int(token), end


def read_pgm(data: bytes) -> ImageGrid:
    """Parse a binary P5 PGM with ``maxval <= 255``."""
    data = bytes(data)
    if data[:2] != b"P5":
        raise FormatError(f"bad magic {data[:2]!r}, expected b'P5'", 0)
    pos = 2
    if pos < len(data) and data[pos:pos + 1] not in _WHITESPACE + b"#":
        raise FormatError("magic must be followed by whitespace", pos)
    width, pos = _read_int(data, pos, "width")
    height, pos = _read_int(data, pos, "height")
    maxval, pos = _read_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise FormatError(f"image dimensions must be positive, got {width}x{height}", pos)
    if not 1 <= maxval <= 255:
        raise FormatError(f"unsupported maxval {maxval} (only 8-bit PGM)", pos)
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise FormatError("missing whitespace before raster", pos)
    pos += 1
    need = width * height
    if len(data) - pos < need:
        raise FormatError(f"raster truncated: need {need} bytes, have {len(data) - pos}", len(data))
    pixels = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(height, width)
    if maxval < 255 and pixels.max() > maxval:
        bad = int(np.argmax(pixels.reshape(-1) > maxval))
        raise FormatError(f"pixel exceeds maxval {maxval}", pos + bad)
    return ImageGrid(pixels.copy())


def write_pgm(grid: ImageGrid) -> bytes:
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(grid.pixels, dtype=np.uint8).tobytes()


def load_pgm(path) -> ImageGrid:
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(grid: ImageGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(grid))


def pad_and_split(grid: ImageGrid, box_side: int) -> tuple[BoxLayout, list]:
    """Edge-replicate to box multiples and cut into row-major float64 boxes."""
    layout = BoxLayout.for_image(grid.width, grid.height, box_side)
    padded = np.pad(
        grid.pixels.astype(np.float64),
        ((0, layout.pad_bottom), (0, layout.pad_right)),
        mode="edge",
    )
    s = box_side
    blocks = [
        padded[r * s:(r + 1) * s, c * s:(c + 1) * s].copy()
        for r in range(layout.rows)
        for c in range(layout.cols)
    ]
    return layout, blocks


def round_half_away(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def to_pixels(values) -> np.ndarray:
    """Clamp reals to ``[0, 255]`` and round half away from zero."""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DomainError("cannot convert non-finite values to pixels")
    return round_half_away(np.clip(values, 0.0, 255.0)).astype(np.uint8)


def merge_boxes(layout: BoxLayout, blocks) -> ImageGrid:
    """Inverse of :func:`pad_and_split`: reassemble, crop, clamp and round."""
    blocks = list(blocks)
    if len(blocks) != layout.rows * layout.cols:
        raise DomainError(f"layout needs {layout.rows * layout.cols} boxes, got {len(blocks)}")
    s = layout.box_side
    full = np.empty((layout.rows * s, layout.cols * s))
    for k, block in enumerate(blocks):
        block = np.asarray(block, dtype=np.float64)
        if block.shape != (s, s):
            raise DomainError(f"box {k} has shape {block.shape}, expected {(s, s)}")
        r, c = divmod(k, layout.cols)
        full[r * s:(r + 1) * s, c * s:(c + 1) * s] = block
    return ImageGrid(to_pixels(full[:layout.height, :layout.width]))
