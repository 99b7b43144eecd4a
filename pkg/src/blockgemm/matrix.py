"""Strided row-major float32 matrix views and shared numeric helpers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidStrideError, ShapeMismatchError

ELEMENT_BYTES = 4
_INT64_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class Dims:
    """GEMM problem size: A is M x K, B is K x N, C is M x N."""

    M: int
    N: int
    K: int

    def __post_init__(self):
        for name in ("M", "N", "K"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ShapeMismatchError(f"{name} must be a positive integer, got {value!r}")


@dataclass(eq=False)
class MatrixView:
    """A rows x cols matrix stored row-major in ``data``.

    Row ``i`` starts at ``data[i * stride]`` and its ``cols`` elements are
    contiguous. Anything that is converted on construction (lists, float64
    arrays, non-contiguous arrays) is copied, so ``view.data`` is always the
    storage that kernels read and write.
    """

    data: np.ndarray
    rows: int
    cols: int
    stride: int

    def __post_init__(self):
        data = self.data
        if not (
            isinstance(data, np.ndarray)
            and data.dtype == np.float32
            and data.ndim == 1
            and data.flags.c_contiguous
        ):
            data = np.ascontiguousarray(np.asarray(data, dtype=np.float32).ravel())
            self.data = data
        if self.rows < 1 or self.cols < 1:
            raise ShapeMismatchError(f"matrix must be at least 1x1, got {self.rows}x{self.cols}")
        if self.stride < self.cols:
            raise InvalidStrideError(f"stride {self.stride} is smaller than cols {self.cols}")
        needed = (self.rows - 1) * self.stride + self.cols
        if data.size < needed:
            raise InvalidStrideError(
                f"{self.rows}x{self.cols} view with stride {self.stride} needs {needed} elements, "
                f"buffer has {data.size}"
            )

    @classmethod
    def from_array(cls, array, stride: int | None = None) -> "MatrixView":
        """Copy a 2-D array into fresh storage with the given row stride."""
        array = np.asarray(array, dtype=np.float32)
        if array.ndim != 2:
            raise ShapeMismatchError(f"expected a 2-D array, got shape {array.shape}")
        rows, cols = array.shape
        view = _allocate(rows, cols, cols if stride is None else stride)
        view.as_array()[...] = array
        return view

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def as_array(self) -> np.ndarray:
        """Writable (rows, cols) numpy view sharing this matrix's storage."""
        return np.lib.stride_tricks.as_strided(
            self.data,
            shape=(self.rows, self.cols),
            strides=(self.stride * ELEMENT_BYTES, ELEMENT_BYTES),
        )

    def copy(self) -> "MatrixView":
        return MatrixView(self.data.copy(), self.rows, self.cols, self.stride)

    def _offset(self, key) -> int:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"index ({i}, {j}) out of range for {self.rows}x{self.cols} matrix")
        return i * self.stride + j

    def __getitem__(self, key) -> np.float32:
        return self.data[self._offset(key)]

    def __setitem__(self, key, value):
        self.data[self._offset(key)] = value


def _allocate(rows: int, cols: int, stride: int) -> MatrixView:
    if stride < cols:
        raise InvalidStrideError(f"stride {stride} is smaller than cols {cols}")
    # rows * stride rather than the tight bound keeps every row's padding
    # slots in the buffer, including the last row's.
    return MatrixView(np.zeros(rows * stride, dtype=np.float32), rows, cols, stride)


def matrix_filled(rows: int, cols: int, stride: int, generator: Callable) -> MatrixView:
    """Build a matrix whose element (i, j) is ``generator(i, j)``.

    The generator is called once with broadcastable integer index arrays of
    shape (rows, 1) and (1, cols); scalar-returning generators work too.
    Stride padding is zero.
    """
    view = _allocate(rows, cols, stride)
    ii = np.arange(rows)[:, None]
    jj = np.arange(cols)[None, :]
    values = np.asarray(generator(ii, jj), dtype=np.float32)
    view.as_array()[...] = np.broadcast_to(values, (rows, cols))
    return view


def uniform_generator(seed: int, low: float = -1.0, high: float = 1.0) -> Callable:
    """Generator for ``matrix_filled`` drawing uniform values from a seeded PCG64 stream."""
    rng = np.random.default_rng(seed)

    def generate(i, j):
        shape = np.broadcast_shapes(np.shape(i), np.shape(j))
        return rng.uniform(low, high, size=shape)

    return generate


def random_matrix(rows: int, cols: int, stride: int | None = None, seed: int = 0) -> MatrixView:
    return matrix_filled(rows, cols, cols if stride is None else stride, uniform_generator(seed))


def flop_count(dims) -> int:
    """Floating-point operations in one M x N x K multiply: 2MNK."""
    if not isinstance(dims, Dims):
        dims = Dims(*dims)
    count = 2 * int(dims.M) * int(dims.N) * int(dims.K)
    if count > _INT64_MAX:
        raise OverflowError(f"flop count {count} does not fit in 64 bits")
    return count


def max_abs_diff(c1: MatrixView, c2: MatrixView) -> float:
    """Largest elementwise |c1 - c2| over the in-bounds elements, in float64."""
    if c1.shape != c2.shape:
        raise ShapeMismatchError(f"shape {c1.shape} does not match {c2.shape}")
    diff = np.abs(c1.as_array().astype(np.float64) - c2.as_array().astype(np.float64))
    return float(diff.max())
