"""The ``.qpg`` container and its DEFLATE-packed tensor payload.

Little-endian layout::

    magic "QPG1" | u8 version | u8 mode (0 qzip, 1 qpeg) | u8 b | u8 n
    u16 width | u16 height | u16 box_side
    u8 flags (bit0 dct, bit1 level_shift, bit2 quantized) | f32 quant_step
    u16 box_rows | u16 box_cols
    per box: f32 scale, u16 chi_2 .. chi_n
    one raw DEFLATE stream: every box, every site, row-major tensor entries
    as f32 (or i32 multiples of quant_step when quantized)

The header alone fixes the payload size, so a decoder needs no side
information.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import EncodeError, FormatError, UnsupportedVersionError

MAGIC = b"QPG1"
VERSION = 1
MODE_QZIP = 0
MODE_QPEG = 1

FLAG_DCT = 0x01
FLAG_LEVEL_SHIFT = 0x02
FLAG_QUANTIZED = 0x04
_KNOWN_FLAGS = FLAG_DCT | FLAG_LEVEL_SHIFT | FLAG_QUANTIZED

_HEADER = struct.Struct("<4sBBBBHHHBfHH")
_U16_MAX = 0xFFFF
_I32_MAX = 2**31 - 1


@dataclass
class BoxRecord:
    scale: float
    bonds: list  # chi_2 .. chi_n


@dataclass
class Container:
    mode: int
    b: int
    n: int
    width: int
    height: int
    box_side: int
    flags: int
    quant_step: float
    box_rows: int
    box_cols: int
    boxes: list = field(default_factory=list)
    payload: bytes = b""
    version: int = VERSION

    @property
    def d(self) -> int:
        return self.b * self.b

    @property
    def use_dct(self) -> bool:
        return bool(self.flags & FLAG_DCT)

    @property
    def level_shift(self) -> bool:
        return bool(self.flags & FLAG_LEVEL_SHIFT)

    @property
    def quantized(self) -> bool:
        return bool(self.flags & FLAG_QUANTIZED)

    def site_shapes(self, box: BoxRecord) -> list:
        full = [1] + list(box.bonds) + [1]
        return [(full[a], self.d, full[a + 1]) for a in range(self.n)]

    def payload_entries(self) -> int:
        return sum(l * d * r for box in self.boxes for (l, d, r) in self.site_shapes(box))

    def header_bytes(self) -> bytes:
        for name in ("width", "height", "box_side", "box_rows", "box_cols"):
            if not 0 <= getattr(self, name) <= _U16_MAX:
                raise EncodeError(f"{name}={getattr(self, name)} does not fit in u16")
        if not (0 <= self.b <= 255 and 0 <= self.n <= 255):
            raise EncodeError("b and n must fit in u8")
        parts = [
            _HEADER.pack(
                MAGIC, self.version, self.mode, self.b, self.n,
                self.width, self.height, self.box_side,
                self.flags, self.quant_step, self.box_rows, self.box_cols,
            )
        ]
        box_fmt = struct.Struct("<f" + "H" * (self.n - 1))
        for box in self.boxes:
            if len(box.bonds) != self.n - 1 or any(not 1 <= x <= _U16_MAX for x in box.bonds):
                raise EncodeError(f"bad bond profile {box.bonds}")
            if not np.isfinite(np.float32(box.scale)):
                raise EncodeError(f"scale {box.scale} is not representable as f32")
            parts.append(box_fmt.pack(box.scale, *box.bonds))
        return b"".join(parts)

    def to_bytes(self) -> bytes:
        return self.header_bytes() + self.payload

    @property
    def stored_bits(self) -> int:
        return 8 * len(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Container":
        return parse_container(data)


def parse_container(data: bytes) -> Container:
    """Parse and structurally validate a container (payload still compressed)."""
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise FormatError(f"container truncated: {len(data)} bytes, header needs {_HEADER.size}", len(data))
    (magic, version, mode, b, n, width, height, box_side,
     flags, quant_step, box_rows, box_cols) = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported container version {version}", 4)
    if mode not in (MODE_QZIP, MODE_QPEG):
        raise FormatError(f"unknown mode {mode}", 5)
    if b < 2 or n < 1:
        raise FormatError(f"invalid addressing b={b}, n={n}", 6)
    if b**n != box_side:
        raise FormatError(f"box side {box_side} != {b}**{n}", 12)
    if width < 1 or height < 1:
        raise FormatError(f"invalid image size {width}x{height}", 8)
    if flags & ~_KNOWN_FLAGS:
        raise FormatError(f"unknown flag bits {flags:#04x}", 14)
    quantized = bool(flags & FLAG_QUANTIZED)
    if quantized and not (np.isfinite(quant_step) and quant_step > 0):
        raise FormatError(f"quantized container with invalid step {quant_step}", 15)
    if box_rows != -(-height // box_side) or box_cols != -(-width // box_side):
        raise FormatError(
            f"box grid {box_rows}x{box_cols} inconsistent with {width}x{height} image", 19
        )
    if mode == MODE_QZIP and (flags != 0 or width != box_side or height != box_side):
        raise FormatError("qzip container must hold a single unflagged b**n box", 14)

    d = b * b
    box_fmt = struct.Struct("<f" + "H" * (n - 1))
    pos = _HEADER.size
    boxes = []
    for k in range(box_rows * box_cols):
        if len(data) - pos < box_fmt.size:
            raise FormatError(f"box table truncated at box {k}", len(data))
        scale, *bonds = box_fmt.unpack_from(data, pos)
        if not (np.isfinite(scale) and scale >= 0):
            raise FormatError(f"box {k} has invalid scale {scale}", pos)
        for a, chi in enumerate(bonds, start=2):
            if not 1 <= chi <= d ** min(a - 1, n - a + 1):
                raise FormatError(f"box {k} bond chi_{a}={chi} outside [1, ceiling]", pos)
        boxes.append(BoxRecord(float(scale), list(bonds)))
        pos += box_fmt.size
    return Container(
        mode, b, n, width, height, box_side, flags, float(quant_step),
        box_rows, box_cols, boxes, data[pos:], version,
    )


def pack_payload(tensors, quant_step: float = 0.0) -> bytes:
    """Serialize tensors little-endian and DEFLATE them (raw RFC 1951 stream).

    With ``quant_step > 0`` each entry is stored as the i32 nearest to
    ``t / step``, where ``step`` is ``quant_step`` rounded to f32 (the
    precision the header keeps).
    """
    flat = np.concatenate([np.asarray(t, dtype=np.float64).reshape(-1) for t in tensors]) \
        if len(tensors) else np.zeros(0)
    if not np.all(np.isfinite(flat)):
        raise EncodeError("tensor entries must be finite")
    if quant_step:
        step = float(np.float32(quant_step))
        if not step > 0:
            raise EncodeError(f"quantization step must be positive, got {quant_step}")
        q = np.round(flat / step)
        if np.any(np.abs(q) > _I32_MAX):
            raise EncodeError("quantized value overflows i32; increase the step")
        raw = q.astype("<i4").tobytes()
    else:
        with np.errstate(over="ignore"):
            f32 = flat.astype("<f4")
        if not np.all(np.isfinite(f32)):
            raise EncodeError("tensor entries overflow f32")
        raw = f32.tobytes()
    comp = zlib.compressobj(9, zlib.DEFLATED, -15, 9, zlib.Z_DEFAULT_STRATEGY)
    return comp.compress(raw) + comp.flush()


def unpack_payload(data: bytes, shapes, quant_step: float = 0.0) -> list:
    """Inverse of :func:`pack_payload` given the tensor shapes."""
    shapes = [tuple(s) for s in shapes]
    count = sum(int(np.prod(s)) for s in shapes)
    nbytes = 4 * count
    inflater = zlib.decompressobj(-15)
    try:
        raw = inflater.decompress(bytes(data), nbytes)
        if len(raw) == nbytes and not inflater.eof:
            # a well-formed stream may still need its end-of-block marker
            raw += inflater.decompress(inflater.unconsumed_tail, 1)
            raw += inflater.flush()
    except zlib.error as exc:
        raise FormatError(f"payload inflate failed: {exc}") from exc
    if len(raw) != nbytes:
        raise FormatError(f"payload holds {len(raw)} bytes, bond profile needs {nbytes}")
    if not inflater.eof:
        raise FormatError("payload DEFLATE stream is truncated")
    if inflater.unused_data or inflater.unconsumed_tail:
        raise FormatError("trailing bytes after payload DEFLATE stream")
    with np.errstate(invalid="ignore", over="ignore"):
        if quant_step:
            values = np.frombuffer(raw, dtype="<i4").astype(np.float64) * float(np.float32(quant_step))
        else:
            values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise FormatError("payload contains non-finite values")
    out, pos = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        out.append(values[pos:pos + size].reshape(shape))
        pos += size
    return out
