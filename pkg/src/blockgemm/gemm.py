"""SGEMM entry points: C <- alpha * A @ B + beta * C."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numba import njit

from .config import Axis, BlockingConfig, LoopOrder, default_config
from .errors import AliasingError, ConfigError, ShapeMismatchError
from .kernel import DEFAULT_PREFETCH_DISTANCE, MICRO_N, reference_dot5, vector_dot5
from .matrix import Dims, MatrixView
from .pack import aligned_zeros, pack_into, pad_to_multiple


class KernelVariant(str, enum.Enum):
    NAIVE = "naive"
    BLOCKED_SCALAR = "scalar"
    BLOCKED_VECTOR = "vector"


_AXIS_CODE = {Axis.ROWS_OF_A: 0, Axis.COLS_OF_B: 1, Axis.COMMON_K: 2}
_L1_ORDER = LoopOrder(Axis.COLS_OF_B, Axis.ROWS_OF_A)


@dataclass(frozen=True)
class GemmParams:
    alpha: np.float32
    beta: np.float32
    A: MatrixView
    B: MatrixView
    C: MatrixView
    dims: Dims
    config: BlockingConfig
    variant: KernelVariant

    @classmethod
    def build(cls, alpha, A, B, beta, C, config=None, variant=KernelVariant.BLOCKED_VECTOR) -> "GemmParams":
        """Validate operands and configuration; raises before anything is written."""
        config = default_config() if config is None else config
        variant = KernelVariant(variant)
        if A.cols != B.rows or C.rows != A.rows or C.cols != B.cols:
            raise ShapeMismatchError(
                f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols} into {C.rows}x{C.cols}"
            )
        for name, other in (("A", A), ("B", B)):
            if np.shares_memory(C.data, other.data):
                raise AliasingError(f"C shares storage with {name}")
        if variant is not KernelVariant.NAIVE:
            _check_blocked_config(config)
        return cls(
            np.float32(alpha), np.float32(beta), A, B, C, Dims(A.rows, B.cols, A.cols), config, variant
        )


def _check_blocked_config(config: BlockingConfig) -> None:
    if config.l1_n != MICRO_N:
        raise ConfigError(f"the microkernel is {MICRO_N} columns wide; l1_n={config.l1_n}")
    if config.l2_k != config.l1_k:
        raise ConfigError(f"l2_k ({config.l2_k}) must equal l1_k ({config.l1_k})")
    if config.l1_loop_order != _L1_ORDER:
        raise ConfigError("L1 loops must walk panels of B outermost and rows of A innermost")


@njit(cache=True)
def _naive(alpha, a, lda, b, ldb, beta, c, ldc, m, n, k):
    for x in range(m):
        for y in range(n):
            s = np.float32(0.0)
            for z in range(k):
                s += a[x * lda + z] * b[z * ldb + y]
            if beta == 0:
                c[x * ldc + y] = alpha * s
            else:
                c[x * ldc + y] = alpha * s + beta * c[x * ldc + y]


@njit(cache=True)
def _scale(beta, c, ldc, m, n):
    for i in range(m):
        for j in range(n):
            if beta == 0:
                c[i * ldc + j] = 0.0
            else:
                c[i * ldc + j] = beta * c[i * ldc + j]


@njit(cache=True)
def _blocked(
    alpha, a, lda, b, ldb, beta, c, ldc, m, n, k,
    l2_m, l2_n, kb, unroll, o_outer, o_middle, o_inner,
    panel, arow, vector, pf_dist,
):
    counts = np.empty(3, np.int64)
    counts[0] = (m + l2_m - 1) // l2_m
    counts[1] = (n + l2_n - 1) // l2_n
    counts[2] = (k + kb - 1) // kb
    blk = np.empty(3, np.int64)
    for t0 in range(counts[o_outer]):
        blk[o_outer] = t0
        for t1 in range(counts[o_middle]):
            blk[o_middle] = t1
            for t2 in range(counts[o_inner]):
                blk[o_inner] = t2
                i0 = blk[0] * l2_m
                i1 = min(i0 + l2_m, m)
                j0 = blk[1] * l2_n
                j1 = min(j0 + l2_n, n)
                k0 = blk[2] * kb
                k_len = min(kb, k - k0)
                k_pad = (k_len + unroll - 1) // unroll * unroll
                first = blk[2] == 0
                padded_a = k_pad != k_len
                if padded_a:
                    arow[k_len:k_pad] = 0.0
                # L1 outer: one packed panel of five B columns
                for jp in range(j0, j1, 5):
                    n_cols = min(5, j1 - jp)
                    pack_into(panel, b, ldb, k0, k_len, jp, n_cols, k_pad, 5)
                    # L1 inner: rows of A against the resident panel
                    for i in range(i0, i1):
                        if padded_a:
                            arow[:k_len] = a[i * lda + k0 : i * lda + k0 + k_len]
                            src = arow
                            off = 0
                        else:
                            src = a
                            off = i * lda + k0
                        if vector:
                            v = vector_dot5(src, off, panel, k_pad, pf_dist)
                        else:
                            v = reference_dot5(src, off, panel, k_pad)
                        row = i * ldc + jp
                        for cc in range(n_cols):
                            val = alpha * v[cc]
                            if not first:
                                c[row + cc] += val
                            elif beta == 0:
                                c[row + cc] = val
                            else:
                                c[row + cc] = val + beta * c[row + cc]


def gemm_naive(alpha, A: MatrixView, B: MatrixView, beta, C: MatrixView) -> None:
    """Triple loop with one sequential float32 accumulator per element of C."""
    p = GemmParams.build(alpha, A, B, beta, C, variant=KernelVariant.NAIVE)
    _run_naive(p)


def _run_naive(p: GemmParams) -> None:
    d = p.dims
    if p.alpha == 0:
        _scale(p.beta, p.C.data, p.C.stride, d.M, d.N)
        return
    _naive(p.alpha, p.A.data, p.A.stride, p.B.data, p.B.stride, p.beta, p.C.data, p.C.stride, d.M, d.N, d.K)


def _run_blocked(p: GemmParams, prefetch_distance: int | None) -> None:
    d, cfg = p.dims, p.config
    if p.alpha == 0:
        _scale(p.beta, p.C.data, p.C.stride, d.M, d.N)
        return
    order = tuple(_AXIS_CODE[axis] for axis in cfg.l2_loop_order.nesting())
    # one panel and one zero-tailed A row of scratch per call
    panel = aligned_zeros(pad_to_multiple(cfg.l1_k, cfg.unroll) * MICRO_N)
    arow = aligned_zeros(cfg.l1_k)
    _blocked(
        p.alpha, p.A.data, p.A.stride, p.B.data, p.B.stride, p.beta, p.C.data, p.C.stride,
        d.M, d.N, d.K,
        cfg.l2_m, cfg.l2_n, cfg.l1_k, cfg.unroll, *order,
        panel, arow,
        p.variant is KernelVariant.BLOCKED_VECTOR,
        prefetch_distance or 0,
    )


def gemm(
    alpha,
    A: MatrixView,
    B: MatrixView,
    beta,
    C: MatrixView,
    config: BlockingConfig | None = None,
    variant=KernelVariant.BLOCKED_VECTOR,
    prefetch_distance: int | None = DEFAULT_PREFETCH_DISTANCE,
) -> None:
    """Compute ``C <- alpha * A @ B + beta * C`` in place.

    Blocked variants walk L2 blocks in ``config.l2_loop_order``, pack five
    columns of B at a time and stream the rows of A past each panel. beta
    scales C once, on the first K block; later K blocks accumulate. With
    ``beta == 0`` the old contents of C are ignored, NaNs included.
    ``prefetch_distance=None`` disables the A-row prefetch hints.
    """
    p = GemmParams.build(alpha, A, B, beta, C, config, variant)
    if p.variant is KernelVariant.NAIVE:
        _run_naive(p)
    else:
        _run_blocked(p, prefetch_distance)


def gemm_dispatch(variant, alpha, A, B, beta, C, config=None, **kwargs) -> None:
    gemm(alpha, A, B, beta, C, config=config, variant=variant, **kwargs)
