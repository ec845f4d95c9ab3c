"""Orthonormal 2D DCT-II on square boxes.

Evaluated directly as ``C @ X @ C.T`` with the orthonormal DCT-II matrix
``C``.  The DC coefficient lands at ``(0, 0)`` and the highest mixed
frequency at ``(N-1, N-1)``.  Level shifting is the codec's job.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DomainError


@lru_cache(maxsize=32)
def dct_matrix(size: int) -> np.ndarray:
    """Orthonormal DCT-II matrix, ``C[k, j] = a_k cos(pi (2j + 1) k / 2N)``."""
    if size < 1:
        raise DomainError(f"block side must be >= 1, got {size}")
    k = np.arange(size)[:, None]
    j = np.arange(size)[None, :]
    c = np.cos(np.pi * (2 * j + 1) * k / (2 * size))
    c *= np.sqrt(2.0 / size)
    c[0] /= np.sqrt(2.0)
    c.setflags(write=False)
    return c


def _square(block) -> np.ndarray:
    x = np.asarray(block, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape[0] < 1:
        raise DomainError(f"expected a non-empty square block, got shape {x.shape}")
    return x


def dct2(block) -> np.ndarray:
    """Separable orthonormal DCT-II along rows then columns."""
    x = _square(block)
    c = dct_matrix(x.shape[0])
    return c @ x @ c.T


def idct2(block) -> np.ndarray:
    """Inverse of :func:`dct2` (orthonormal DCT-III)."""
    y = _square(block)
    c = dct_matrix(y.shape[0])
    return c.T @ y @ c
