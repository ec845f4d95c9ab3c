"""qzip (lossless) and qpeg (lossy) pipelines plus the PSNR metric.

qpeg encodes each box independently::

    level shift -> dct2 -> image_to_ket -> als_truncate(chi) -> [quantize]

and concatenates all site tensors into one DEFLATE stream.  qzip stores
the exact MPS of a single ``b**n`` box with no transform.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import container as fmt
from .container import BoxRecord, Container
from .errors import DomainError, FormatError
from .imageio import BoxLayout, ImageGrid, merge_boxes, pad_and_split, to_pixels
from .mps import (
    DEFAULT_MAX_ELEMENTS,
    MPS,
    AlsConfig,
    als_truncate,
    chi_max,
    exact_mps,
    reconstruct,
)
from .rgmap import AddressScheme, image_to_ket, ket_to_image
from .transform import dct2, idct2

LEVEL_SHIFT = 128.0
QZIP_RANK_TOL = 1e-12


@dataclass
class QpegConfig:
    """Codec parameters; ``box_side = b**n``.

    ``quant_step = 0`` stores raw f32 tensor entries.
    """

    b: int = 2
    n: int = 4
    chi_trunc: int = 4
    use_dct: bool = True
    level_shift: bool = True
    quant_step: float = 0.0
    max_sweeps: int = 50
    rel_tol: float = 1e-8
    pinv_tol: float = 1e-12

    def __post_init__(self):
        self.scheme  # validates b, n
        if int(self.chi_trunc) != self.chi_trunc or self.chi_trunc < 1:
            raise DomainError(f"chi_trunc must be an integer >= 1, got {self.chi_trunc}")
        ceiling = chi_max(self.scheme)
        if self.chi_trunc > ceiling:
            raise DomainError(f"chi_trunc={self.chi_trunc} exceeds chi_max={ceiling} for b={self.b}, n={self.n}")
        if not (math.isfinite(self.quant_step) and self.quant_step >= 0):
            raise DomainError(f"quant_step must be finite and >= 0, got {self.quant_step}")
        self.als  # validates solver settings

    @property
    def scheme(self) -> AddressScheme:
        return AddressScheme(self.b, self.n)

    @property
    def box_side(self) -> int:
        return self.b**self.n

    @property
    def als(self) -> AlsConfig:
        return AlsConfig(self.chi_trunc, self.max_sweeps, self.rel_tol, self.pinv_tol)

    @property
    def flags(self) -> int:
        flags = 0
        if self.use_dct:
            flags |= fmt.FLAG_DCT
        if self.level_shift:
            flags |= fmt.FLAG_LEVEL_SHIFT
        if self.quant_step:
            flags |= fmt.FLAG_QUANTIZED
        return flags


@dataclass
class Metrics:
    psnr_db: float
    mse: float
    stored_bits: int | None = None
    bits_per_pixel: float | None = None


def psnr(a: ImageGrid, b: ImageGrid, stored_bits: int | None = None) -> Metrics:
    """MSE over all pixels and ``10 log10(255^2 / MSE)``; identical images give ``inf``."""
    if a.pixels.shape != b.pixels.shape:
        raise DomainError(f"image sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}")
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    mse = float(np.mean(diff * diff))
    value = math.inf if mse == 0.0 else 10.0 * math.log10(255.0**2 / mse)
    bpp = None if stored_bits is None else stored_bits / (a.width * a.height)
    return Metrics(value, mse, stored_bits, bpp)


def _f32_scale(mps: MPS) -> float:
    return float(np.float32(mps.scale))


@dataclass
class BoxEncoding:
    """In-memory result for one box, before serialization."""

    mps: MPS
    objective: float
    converged: bool
    sweeps: int
    history: list = field(default_factory=list, repr=False)


def box_to_ket(block, config: QpegConfig):
    x = np.asarray(block, dtype=np.float64)
    if config.level_shift:
        x = x - LEVEL_SHIFT
    if config.use_dct:
        x = dct2(x)
    return image_to_ket(x, config.scheme)


def encode_box(block, config: QpegConfig) -> BoxEncoding:
    result = als_truncate(box_to_ket(block, config), config.als)
    return BoxEncoding(result.mps, result.objective, result.converged, result.sweeps, result.history)


def decode_box(mps: MPS, use_dct: bool, level_shift: bool, max_elements: int = DEFAULT_MAX_ELEMENTS) -> np.ndarray:
    """Real-valued box (before clamping/rounding) from its MPS."""
    x = ket_to_image(reconstruct(mps, max_elements))
    if use_dct:
        x = idct2(x)
    if level_shift:
        x = x + LEVEL_SHIFT
    return x


def _map(fn, items, workers: int):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _assemble(mode, scheme, width, height, flags, quant_step, layout, mpss) -> Container:
    boxes = [BoxRecord(_f32_scale(m), m.inner_bonds) for m in mpss]
    payload = fmt.pack_payload([s for m in mpss for s in m.sites], quant_step)
    return Container(
        mode, scheme.b, scheme.n, width, height, scheme.side,
        flags, float(np.float32(quant_step)), layout.rows, layout.cols, boxes, payload,
    )


def qpeg_encode_boxes(grid: ImageGrid, config: QpegConfig, workers: int = 1):
    """Encode and also return the per-box in-memory results."""
    layout, blocks = pad_and_split(grid, config.box_side)
    encoded = _map(lambda blk: encode_box(blk, config), blocks, workers)
    c = _assemble(
        fmt.MODE_QPEG, config.scheme, grid.width, grid.height, config.flags,
        config.quant_step, layout, [e.mps for e in encoded],
    )
    return c, encoded


def qpeg_encode(grid: ImageGrid, config: QpegConfig, workers: int = 1) -> Container:
    """Lossy qpeg encoding; output bytes are deterministic for given input and config."""
    return qpeg_encode_boxes(grid, config, workers)[0]


def qzip_encode(grid: ImageGrid, scheme: AddressScheme) -> Container:
    """Lossless encoding of a single ``b**n`` square image as its exact MPS."""
    side = scheme.side
    if grid.width != side or grid.height != side:
        raise DomainError(f"qzip needs a {side}x{side} image, got {grid.width}x{grid.height}")
    mps = exact_mps(image_to_ket(grid.pixels, scheme), QZIP_RANK_TOL)
    layout = BoxLayout.for_image(side, side, side)
    return _assemble(fmt.MODE_QZIP, scheme, side, side, 0, 0.0, layout, [mps])


def _as_container(c) -> Container:
    if isinstance(c, Container):
        return c
    return fmt.parse_container(c)


def container_mps(c: Container) -> list:
    """Deserialize every box of a container into an :class:`MPS`."""
    scheme = AddressScheme(c.b, c.n)
    shapes = [c.site_shapes(box) for box in c.boxes]
    step = c.quant_step if c.quantized else 0.0
    tensors = fmt.unpack_payload(c.payload, [s for box in shapes for s in box], step)
    out, pos = [], 0
    for box, box_shapes in zip(c.boxes, shapes):
        sites = tensors[pos:pos + len(box_shapes)]
        pos += len(box_shapes)
        out.append(MPS(sites, scheme, box.scale))
    return out


def _decode(c: Container, workers: int, max_elements: int) -> ImageGrid:
    mpss = container_mps(c)
    layout = BoxLayout.for_image(c.width, c.height, c.box_side)
    # corrupt scales can overflow; caught by the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        blocks = _map(lambda m: decode_box(m, c.use_dct, c.level_shift, max_elements), mpss, workers)
    for block in blocks:
        if not np.all(np.isfinite(block)):
            raise FormatError("decoded box contains non-finite values")
    return merge_boxes(layout, blocks)


def qpeg_decode(c, workers: int = 1, max_elements: int = DEFAULT_MAX_ELEMENTS) -> ImageGrid:
    c = _as_container(c)
    if c.mode != fmt.MODE_QPEG:
        raise FormatError(f"container mode {c.mode} is not qpeg")
    return _decode(c, workers, max_elements)


def qzip_decode(c, max_elements: int = DEFAULT_MAX_ELEMENTS) -> ImageGrid:
    c = _as_container(c)
    if c.mode != fmt.MODE_QZIP:
        raise FormatError(f"container mode {c.mode} is not qzip")
    mps = container_mps(c)[0]
    with np.errstate(over="ignore", invalid="ignore"):
        values = ket_to_image(reconstruct(mps, max_elements))
    if not np.all(np.isfinite(values)):
        raise FormatError("decoded image contains non-finite values")
    return ImageGrid(to_pixels(values))


def decode(c, workers: int = 1, max_elements: int = DEFAULT_MAX_ELEMENTS) -> ImageGrid:
    """Decode either mode, dispatching on the header."""
    c = _as_container(c)
    if c.mode == fmt.MODE_QZIP:
        return qzip_decode(c, max_elements)
    return qpeg_decode(c, workers, max_elements)
