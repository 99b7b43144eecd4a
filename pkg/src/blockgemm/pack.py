"""Packing of B panels into the aligned, k-interleaved layout the microkernel streams.

A panel covers ``k_len`` rows and up to ``n'`` columns of B. It is stored as
``k_padded / W`` groups; each group holds, for every panel column in turn,
the W consecutive k-values of that column::

    buffer[g*W*n' + c*W + lane] == B[row_start + g*W + lane, col_start + c]

Rows past ``k_len`` and columns past ``n_cols`` are zero, so a panel is
always ``k_padded * n'`` floats and the kernel has a single shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .config import BlockingConfig
from .errors import ShapeMismatchError
from .matrix import ELEMENT_BYTES, MatrixView
from .simd import WIDTH

#: Panel buffers start on a cache-line boundary, which also satisfies the
#: 16-byte alignment the aligned vector loads need.
ALIGN_BYTES = 64


def pad_to_multiple(x: int, m: int) -> int:
    """Smallest multiple of ``m`` that is >= ``x``; an empty length still takes one step."""
    if x <= 0:
        return m
    return -(-x // m) * m


def aligned_zeros(n: int, align: int = ALIGN_BYTES) -> np.ndarray:
    """Zeroed float32 array of length ``n`` whose data pointer is ``align``-aligned."""
    raw = np.zeros(n + align // ELEMENT_BYTES, dtype=np.float32)
    skip = (-raw.ctypes.data % align) // ELEMENT_BYTES
    out = raw[skip : skip + n]
    assert out.ctypes.data % align == 0
    return out


def is_aligned(buffer: np.ndarray, align: int = WIDTH * ELEMENT_BYTES) -> bool:
    return buffer.ctypes.data % align == 0


@dataclass(eq=False)
class PackedPanel:
    buffer: np.ndarray
    k_padded: int
    n_cols: int
    source_k: range
    source_cols: range

    @property
    def width(self) -> int:
        return self.buffer.size // self.k_padded


@njit(cache=True)
def pack_into(buffer, b, ldb, row_start, k_len, col_start, n_cols, k_padded, width):
    """Fill ``buffer[:k_padded*width]`` from the flat row-major B storage."""
    groups = k_padded // 4
    for g in range(groups):
        base = g * 4 * width
        for c in range(width):
            dst = base + c * 4
            for lane in range(4):
                k = g * 4 + lane
                if c < n_cols and k < k_len:
                    buffer[dst + lane] = b[(row_start + k) * ldb + col_start + c]
                else:
                    buffer[dst + lane] = 0.0


def pack_b_panel(
    B: MatrixView,
    row_start: int,
    k_len: int,
    col_start: int,
    n_cols: int,
    config: BlockingConfig,
    out: np.ndarray | None = None,
) -> PackedPanel:
    """Copy ``B[row_start:row_start+k_len, col_start:col_start+n_cols]`` into a packed panel.

    ``out`` may supply a reusable aligned scratch buffer of at least
    ``k_padded * config.l1_n`` floats.
    """
    width = config.l1_n
    if n_cols < 1 or n_cols > width:
        raise ShapeMismatchError(f"n_cols must be in 1..{width}, got {n_cols}")
    if k_len < 0 or row_start < 0 or col_start < 0:
        raise ShapeMismatchError("panel slice bounds must be non-negative")
    if row_start + k_len > B.rows or col_start + n_cols > B.cols:
        raise ShapeMismatchError(
            f"slice rows [{row_start}, {row_start + k_len}) x cols [{col_start}, {col_start + n_cols}) "
            f"lies outside the {B.rows}x{B.cols} matrix"
        )
    k_padded = pad_to_multiple(k_len, config.unroll)
    size = k_padded * width
    if out is None:
        buffer = aligned_zeros(size)
    else:
        if out.size < size or not is_aligned(out):
            raise ShapeMismatchError(f"scratch buffer must be aligned and hold {size} floats")
        buffer = out[:size]
    pack_into(buffer, B.data, B.stride, row_start, k_len, col_start, n_cols, k_padded, width)
    return PackedPanel(
        buffer,
        k_padded,
        n_cols,
        range(row_start, row_start + k_len),
        range(col_start, col_start + n_cols),
    )


def unpack_panel(panel: PackedPanel) -> np.ndarray:
    """Logical (k_padded, width) contents of a panel, ghost rows and columns included."""
    width = panel.width
    groups = panel.buffer.reshape(panel.k_padded // WIDTH, width, WIDTH)
    return groups.transpose(0, 2, 1).reshape(panel.k_padded, width).copy()
