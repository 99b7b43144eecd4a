"""The 1 x 5 microkernel: five simultaneous float32 dot products.

Register plan of the vector kernel, per 4-element k-group::

    x        <- 4 values of the A row (loaded once, used for all 5 columns)
    b1 / b2  <- 4 values of panel column c, alternating between two names
    acc0..4  <- acc_c += x * b

That is 8 live vectors. At the end each accumulator holds 4 partial sums,
which are reduced as ``(l0 + l1) + (l2 + l3)``.

``reference_dot5`` computes the same thing one lane at a time in plain
scalar code. Every lane is a sequential sum over k-groups in both
versions and the final reduction is identical, so the two agree bit for
bit. Neither uses fused multiply-add.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ShapeMismatchError
from .pack import PackedPanel
from .simd import WIDTH, prefetch, vadd, vlane, vload, vload_aligned, vmul, vreduce, vzero

#: Columns per microkernel call.
MICRO_N = 5
#: A-row read-ahead, in elements, for the prefetch hint.
DEFAULT_PREFETCH_DISTANCE = 32


@dataclass(frozen=True)
class MicroTile:
    values: np.ndarray

    def __iter__(self):
        return iter(self.values)


@njit(cache=True, inline="always")
def vector_dot5(a, a_off, panel, k_padded, pf_dist):
    acc0 = vzero()
    acc1 = vzero()
    acc2 = vzero()
    acc3 = vzero()
    acc4 = vzero()
    g = 0
    # 16 k-values per trip: four groups, each 5 vector multiplies and adds.
    while g + 16 <= k_padded:
        if pf_dist > 0:
            prefetch(a, a_off + g + pf_dist)
        p = g * 5
        x = vload(a, a_off + g)
        b1 = vload_aligned(panel, p)
        b2 = vload_aligned(panel, p + 4)
        acc0 = vadd(acc0, vmul(x, b1))
        b1 = vload_aligned(panel, p + 8)
        acc1 = vadd(acc1, vmul(x, b2))
        b2 = vload_aligned(panel, p + 12)
        acc2 = vadd(acc2, vmul(x, b1))
        b1 = vload_aligned(panel, p + 16)
        acc3 = vadd(acc3, vmul(x, b2))
        acc4 = vadd(acc4, vmul(x, b1))

        x = vload(a, a_off + g + 4)
        b2 = vload_aligned(panel, p + 20)
        b1 = vload_aligned(panel, p + 24)
        acc0 = vadd(acc0, vmul(x, b2))
        b2 = vload_aligned(panel, p + 28)
        acc1 = vadd(acc1, vmul(x, b1))
        b1 = vload_aligned(panel, p + 32)
        acc2 = vadd(acc2, vmul(x, b2))
        b2 = vload_aligned(panel, p + 36)
        acc3 = vadd(acc3, vmul(x, b1))
        acc4 = vadd(acc4, vmul(x, b2))

        x = vload(a, a_off + g + 8)
        b1 = vload_aligned(panel, p + 40)
        b2 = vload_aligned(panel, p + 44)
        acc0 = vadd(acc0, vmul(x, b1))
        b1 = vload_aligned(panel, p + 48)
        acc1 = vadd(acc1, vmul(x, b2))
        b2 = vload_aligned(panel, p + 52)
        acc2 = vadd(acc2, vmul(x, b1))
        b1 = vload_aligned(panel, p + 56)
        acc3 = vadd(acc3, vmul(x, b2))
        acc4 = vadd(acc4, vmul(x, b1))

        x = vload(a, a_off + g + 12)
        b2 = vload_aligned(panel, p + 60)
        b1 = vload_aligned(panel, p + 64)
        acc0 = vadd(acc0, vmul(x, b2))
        b2 = vload_aligned(panel, p + 68)
        acc1 = vadd(acc1, vmul(x, b1))
        b1 = vload_aligned(panel, p + 72)
        acc2 = vadd(acc2, vmul(x, b2))
        b2 = vload_aligned(panel, p + 76)
        acc3 = vadd(acc3, vmul(x, b1))
        acc4 = vadd(acc4, vmul(x, b2))
        g += 16
    # unroll factors of 4, 8 or 12 leave whole groups behind
    while g < k_padded:
        p = g * 5
        x = vload(a, a_off + g)
        acc0 = vadd(acc0, vmul(x, vload_aligned(panel, p)))
        acc1 = vadd(acc1, vmul(x, vload_aligned(panel, p + 4)))
        acc2 = vadd(acc2, vmul(x, vload_aligned(panel, p + 8)))
        acc3 = vadd(acc3, vmul(x, vload_aligned(panel, p + 12)))
        acc4 = vadd(acc4, vmul(x, vload_aligned(panel, p + 16)))
        g += 4
    return vreduce(acc0), vreduce(acc1), vreduce(acc2), vreduce(acc3), vreduce(acc4)


@njit(cache=True)
def _column_lane(a, a_off, panel, k_padded, c, lane):
    s = np.float32(0.0)
    for g in range(0, k_padded, 4):
        s += a[a_off + g + lane] * panel[g * 5 + c * 4 + lane]
    return s


@njit(cache=True)
def _column_reference(a, a_off, panel, k_padded, c):
    l0 = _column_lane(a, a_off, panel, k_padded, c, 0)
    l1 = _column_lane(a, a_off, panel, k_padded, c, 1)
    l2 = _column_lane(a, a_off, panel, k_padded, c, 2)
    l3 = _column_lane(a, a_off, panel, k_padded, c, 3)
    return (l0 + l1) + (l2 + l3)


@njit(cache=True)
def reference_dot5(a, a_off, panel, k_padded):
    return (
        _column_reference(a, a_off, panel, k_padded, 0),
        _column_reference(a, a_off, panel, k_padded, 1),
        _column_reference(a, a_off, panel, k_padded, 2),
        _column_reference(a, a_off, panel, k_padded, 3),
        _column_reference(a, a_off, panel, k_padded, 4),
    )


@njit(cache=True)
def _reference_partials(a, panel, n_groups, out):
    for c in range(5):
        for lane in range(4):
            out[c, lane] = _column_lane(a, 0, panel, n_groups * 4, c, lane)


@njit(cache=True)
def _vector_partials(a, panel, n_groups, out):
    acc0 = vzero()
    acc1 = vzero()
    acc2 = vzero()
    acc3 = vzero()
    acc4 = vzero()
    for g in range(0, n_groups * 4, 4):
        x = vload(a, g)
        p = g * 5
        acc0 = vadd(acc0, vmul(x, vload_aligned(panel, p)))
        acc1 = vadd(acc1, vmul(x, vload_aligned(panel, p + 4)))
        acc2 = vadd(acc2, vmul(x, vload_aligned(panel, p + 8)))
        acc3 = vadd(acc3, vmul(x, vload_aligned(panel, p + 12)))
        acc4 = vadd(acc4, vmul(x, vload_aligned(panel, p + 16)))
    for lane in range(4):
        out[0, lane] = vlane(acc0, lane)
        out[1, lane] = vlane(acc1, lane)
        out[2, lane] = vlane(acc2, lane)
        out[3, lane] = vlane(acc3, lane)
        out[4, lane] = vlane(acc4, lane)


def _check_inputs(a_row, panel: PackedPanel) -> np.ndarray:
    a_row = np.ascontiguousarray(a_row, dtype=np.float32)
    if a_row.ndim != 1 or a_row.size != panel.k_padded:
        raise ShapeMismatchError(
            f"A row has {a_row.size} elements, panel expects k_padded={panel.k_padded}"
        )
    if panel.width != MICRO_N:
        raise ShapeMismatchError(f"panel is {panel.width} columns wide, kernel needs {MICRO_N}")
    if panel.k_padded % WIDTH:
        raise ShapeMismatchError(f"k_padded {panel.k_padded} is not a multiple of {WIDTH}")
    if panel.buffer.ctypes.data % (WIDTH * 4):
        raise ShapeMismatchError("panel buffer is not 16-byte aligned")
    return a_row


def microkernel(a_row, panel: PackedPanel, prefetch_distance: int = DEFAULT_PREFETCH_DISTANCE) -> MicroTile:
    """Five dot products of ``a_row`` against the panel columns, vector path."""
    a_row = _check_inputs(a_row, panel)
    values = vector_dot5(a_row, 0, panel.buffer, panel.k_padded, prefetch_distance)
    return MicroTile(np.array(values, dtype=np.float32))


def microkernel_reference(a_row, panel: PackedPanel) -> MicroTile:
    """Scalar lane-by-lane version of :func:`microkernel`; bit-identical results."""
    a_row = _check_inputs(a_row, panel)
    values = reference_dot5(a_row, 0, panel.buffer, panel.k_padded)
    return MicroTile(np.array(values, dtype=np.float32))


def lane_accumulators(a_row, panel: PackedPanel, n_groups: int | None = None, vector: bool = True) -> np.ndarray:
    """(5, W) partial sums after the first ``n_groups`` k-groups, before lane reduction."""
    a_row = _check_inputs(a_row, panel)
    groups = panel.k_padded // WIDTH
    n_groups = groups if n_groups is None else n_groups
    if not 0 <= n_groups <= groups:
        raise ValueError(f"n_groups must be in 0..{groups}")
    out = np.zeros((MICRO_N, WIDTH), dtype=np.float32)
    (_vector_partials if vector else _reference_partials)(a_row, panel.buffer, n_groups, out)
    return out


@njit(cache=True)
def _prefetch(data, index):
    prefetch(data, index)


def prefetch_hint(data: np.ndarray, index: int, distance: int = DEFAULT_PREFETCH_DISTANCE) -> None:
    """Ask the CPU to pull ``data[index + distance]`` into L1.

    Advisory only: nothing is read, and an address past the end of ``data``
    never faults.
    """
    _prefetch(data, index + distance)
