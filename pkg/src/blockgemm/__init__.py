"""Cache-blocked single-precision matrix multiply with a 1x5 SIMD microkernel."""

from .config import (
    Axis,
    BlockingConfig,
    CacheGeometry,
    LoopOrder,
    config_from_text,
    default_config,
    derive_l1_k,
    host_config,
    load_config,
)
from .errors import (
    AliasingError,
    CacheTooSmallError,
    ConfigError,
    GemmError,
    InvalidStrideError,
    ShapeMismatchError,
)
from .gemm import GemmParams, KernelVariant, gemm, gemm_dispatch, gemm_naive
from .kernel import MicroTile, lane_accumulators, microkernel, microkernel_reference, prefetch_hint
from .matrix import Dims, MatrixView, flop_count, matrix_filled, max_abs_diff, random_matrix, uniform_generator
from .pack import PackedPanel, pack_b_panel, pad_to_multiple, unpack_panel

__all__ = [
    "AliasingError",
    "Axis",
    "BlockingConfig",
    "CacheGeometry",
    "CacheTooSmallError",
    "ConfigError",
    "Dims",
    "GemmError",
    "GemmParams",
    "InvalidStrideError",
    "KernelVariant",
    "LoopOrder",
    "MatrixView",
    "MicroTile",
    "PackedPanel",
    "ShapeMismatchError",
    "config_from_text",
    "default_config",
    "derive_l1_k",
    "flop_count",
    "gemm",
    "gemm_dispatch",
    "gemm_naive",
    "host_config",
    "lane_accumulators",
    "load_config",
    "matrix_filled",
    "max_abs_diff",
    "microkernel",
    "microkernel_reference",
    "pack_b_panel",
    "pad_to_multiple",
    "prefetch_hint",
    "random_matrix",
    "uniform_generator",
    "unpack_panel",
]
