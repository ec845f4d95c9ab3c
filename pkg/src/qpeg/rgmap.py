"""Renormalization-group (b-ary quadtree) addressing of pixels.

A square image of side ``b**n`` is addressed by ``n`` digits, one per
coarse-graining level.  Digit ``i_k`` (1-based, in ``[1, b*b]``) selects the
sub-cell at level ``k``; ``i_n`` is the coarsest and ``i_1`` the finest.
Within a ``b x b`` super-cell the sub-cell at block-row ``r`` and block-col
``c`` carries the digit ``r*b + c + 1``, so for ``b = 2`` the labels are
up-left=1, up-right=2, down-left=3, down-right=4.

Ket coefficients are linearized with the finest digit varying fastest::

    index(i_n, ..., i_1) = sum_k (i_k - 1) * d**(k - 1)

This linearization is normative for the container format.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class AddressScheme:
    """Branching factor ``b`` per axis and number of levels ``n``."""

    b: int
    n: int

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 2:
            raise DomainError(f"branching factor must be an integer >= 2, got {self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"number of levels must be an integer >= 1, got {self.n}")

    @property
    def d(self) -> int:
        """Local dimension of one site."""
        return self.b * self.b

    @property
    def side(self) -> int:
        return self.b**self.n

    @property
    def size(self) -> int:
        """Number of coefficients, ``d**n``."""
        return self.d**self.n

    @classmethod
    def for_side(cls, side: int, b: int) -> "AddressScheme":
        """Scheme whose image side is exactly ``side``; raises if ``side`` is not a power of ``b``."""
        n, s = 0, 1
        while s < side:
            s *= b
            n += 1
        if s != side or n < 1:
            raise DomainError(f"side {side} is not a positive power of {b}")
        return cls(b, n)


@dataclass
class Ket:
    """Unnormalized real coefficient vector over ``n`` sites of dimension ``d``."""

    scheme: AddressScheme
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64).reshape(-1)
        if self.coeffs.size != self.scheme.size:
            raise DomainError(
                f"ket needs {self.scheme.size} coefficients, got {self.coeffs.size}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def pixel_to_digits(row: int, col: int, scheme: AddressScheme) -> tuple[int, ...]:
    """Digits ``(i_n, ..., i_1)`` addressing pixel ``(row, col)``."""
    side = scheme.side
    if not (0 <= row < side and 0 <= col < side):
        raise DomainError(f"pixel ({row}, {col}) outside a {side}x{side} image")
    b = scheme.b
    digits = []
    for _ in range(scheme.n):
        row, r = divmod(row, b)
        col, c = divmod(col, b)
        digits.append(r * b + c + 1)
    return tuple(reversed(digits))


def digits_to_pixel(digits, scheme: AddressScheme) -> tuple[int, int]:
    """Inverse of :func:`pixel_to_digits`."""
    digits = tuple(digits)
    if len(digits) != scheme.n:
        raise DomainError(f"expected {scheme.n} digits, got {len(digits)}")
    b, d = scheme.b, scheme.d
    row = col = 0
    for digit in digits:  # coarsest first
        if int(digit) != digit or not 1 <= digit <= d:
            raise DomainError(f"digit {digit} outside [1, {d}]")
        r, c = divmod(int(digit) - 1, b)
        row = row * b + r
        col = col * b + c
    return row, col


def digits_to_index(digits, scheme: AddressScheme) -> int:
    """Linear coefficient index of a digit string ``(i_n, ..., i_1)``."""
    digits = tuple(digits)
    if len(digits) != scheme.n:
        raise DomainError(f"expected {scheme.n} digits, got {len(digits)}")
    index = 0
    for digit in digits:
        if not 1 <= digit <= scheme.d:
            raise DomainError(f"digit {digit} outside [1, {scheme.d}]")
        index = index * scheme.d + (digit - 1)
    return index


def _interleave_axes(n: int) -> list[int]:
    # (r_n..r_1, c_n..c_1) -> (r_n, c_n, r_{n-1}, c_{n-1}, ..., r_1, c_1)
    axes = []
    for k in range(n):
        axes += [k, n + k]
    return axes


def image_to_ket(grid, scheme: AddressScheme) -> Ket:
    """Cast a ``b**n`` square block into a ket; a pure permutation of values."""
    block = np.asarray(grid, dtype=np.float64)
    side = scheme.side
    if block.shape != (side, side):
        raise DomainError(f"expected a {side}x{side} block, got shape {block.shape}")
    b, n = scheme.b, scheme.n
    coeffs = block.reshape((b,) * (2 * n)).transpose(_interleave_axes(n)).reshape(-1)
    return Ket(scheme, coeffs)


def ket_to_image(ket: Ket) -> np.ndarray:
    """Inverse of :func:`image_to_ket`; returns a float64 square block."""
    scheme = ket.scheme
    b, n = scheme.b, scheme.n
    inverse = np.argsort(_interleave_axes(n))
    tensor = ket.coeffs.reshape((b,) * (2 * n)).transpose(inverse)
    return tensor.reshape(scheme.side, scheme.side).copy()
