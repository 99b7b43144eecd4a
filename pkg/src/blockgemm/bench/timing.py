"""Wall-clock timing of GEMM calls with cache flushing between repetitions."""

from __future__ import annotations

import logging
import os
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from ..config import PIII_L2_BYTES, BlockingConfig
from ..errors import InvalidStrideError
from ..gemm import KernelVariant, gemm
from ..kernel import DEFAULT_PREFETCH_DISTANCE
from ..matrix import Dims, MatrixView, flop_count, random_matrix

log = logging.getLogger(__name__)

#: Monotonic, high-resolution wall clock (not CPU time).
clock = time.perf_counter

REPLICATION_STRIDE = 700
DEFAULT_FLUSH_BYTES = 4 * PIII_L2_BYTES


def mflops(dims: Dims, seconds: float) -> float:
    return flop_count(dims) / (seconds * 1e6)


@dataclass(frozen=True)
class BenchRecord:
    variant: KernelVariant
    M: int
    N: int
    K: int
    stride: int
    reps: int
    seconds: float
    mflops: float

    @classmethod
    def from_timing(cls, variant, dims: Dims, stride: int, reps: int, seconds: float) -> "BenchRecord":
        if seconds <= 0:
            raise ValueError(f"timing must be positive, got {seconds}")
        return cls(KernelVariant(variant), dims.M, dims.N, dims.K, stride, reps, seconds, mflops(dims, seconds))

    @property
    def dims(self) -> Dims:
        return Dims(self.M, self.N, self.K)


_flush_buffer: np.ndarray | None = None


def flush_caches(flush_bytes: int = DEFAULT_FLUSH_BYTES, l2_capacity_bytes: int | None = None) -> int:
    """Read-modify-write ``flush_bytes`` of scratch memory; returns its checksum.

    The buffer is refilled with the same pattern every call, so the
    checksum only depends on ``flush_bytes``.
    """
    global _flush_buffer
    if flush_bytes <= 0:
        raise ValueError(f"flush_bytes must be positive, got {flush_bytes}")
    if l2_capacity_bytes is not None and flush_bytes < 2 * l2_capacity_bytes:
        raise ValueError(f"flush of {flush_bytes} B is less than twice the {l2_capacity_bytes} B L2")
    n = -(-flush_bytes // 8)
    if _flush_buffer is None or _flush_buffer.size != n:
        _flush_buffer = np.empty(n, dtype=np.int64)
    buf = _flush_buffer
    buf[:] = 0x5A5A
    buf += np.int64(1)
    return int(buf.sum())


def pin_to_cpu(cpu: int | None = None) -> bool:
    """Restrict this process to one logical CPU. Returns False where unsupported."""
    if not hasattr(os, "sched_setaffinity"):
        return False
    try:
        if cpu is None:
            cpu = min(os.sched_getaffinity(0))
        os.sched_setaffinity(0, {cpu})
    except OSError as exc:
        log.warning("could not pin to CPU %s: %s", cpu, exc)
        return False
    return True


def _operands(dims: Dims, stride: int, seed: int) -> tuple[MatrixView, MatrixView, MatrixView]:
    A = random_matrix(dims.M, dims.K, stride, seed)
    B = random_matrix(dims.K, dims.N, stride, seed + 1)
    C = random_matrix(dims.M, dims.N, stride, seed + 2)
    return A, B, C


_warmed: set = set()


def _warm_up(variant: KernelVariant, config, prefetch_distance) -> None:
    # first call of each compiled path pays for numba's JIT / cache load
    key = (variant, prefetch_distance is None)
    if key in _warmed:
        return
    A, B, C = _operands(Dims(2, 2, 2), 2, 0)
    gemm(1.0, A, B, 1.0, C, config=config, variant=variant, prefetch_distance=prefetch_distance)
    _warmed.add(key)


def time_gemm(
    variant,
    dims: Dims,
    stride: int | None = None,
    reps: int = 5,
    flush: bool = True,
    *,
    config: BlockingConfig | None = None,
    seed: int = 42,
    flush_bytes: int = DEFAULT_FLUSH_BYTES,
    prefetch_distance: int | None = DEFAULT_PREFETCH_DISTANCE,
) -> BenchRecord:
    """Median wall-clock time of ``reps`` calls of ``C <- A @ B + C``."""
    variant = KernelVariant(variant)
    stride = max(dims.N, dims.K) if stride is None else stride
    if stride < max(dims.N, dims.K):
        raise InvalidStrideError(f"stride {stride} is smaller than max(N, K) = {max(dims.N, dims.K)}")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    _warm_up(variant, config, prefetch_distance)
    A, B, C = _operands(dims, stride, seed)
    times = []
    for _ in range(reps):
        if flush:
            flush_caches(flush_bytes)
        t0 = clock()
        gemm(1.0, A, B, 1.0, C, config=config, variant=variant, prefetch_distance=prefetch_distance)
        times.append(clock() - t0)
    return BenchRecord.from_timing(variant, dims, stride, reps, statistics.median(times))


@dataclass(frozen=True)
class SweepSpec:
    size_min: int = 16
    size_max: int = 700
    size_step: int = 4
    #: None means stride == size for every point.
    stride: int | None = None
    variants: tuple = tuple(KernelVariant)
    reps: int = 5
    flush: bool = True
    seed: int = 42
    #: Let sizes above ``stride`` use stride == size instead of failing.
    allow_small_stride: bool = False
    flush_bytes: int = DEFAULT_FLUSH_BYTES
    config: BlockingConfig | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(KernelVariant(v) for v in self.variants))
        if self.size_min < 1 or self.size_step < 1 or self.size_max < self.size_min:
            raise ValueError(
                f"bad size range {self.size_min}..{self.size_max} step {self.size_step}"
            )
        if self.stride is not None and self.stride < self.size_max and not self.allow_small_stride:
            raise InvalidStrideError(
                f"stride {self.stride} is smaller than the largest size {self.size_max}"
            )
        if self.reps < 1:
            raise ValueError("reps must be at least 1")

    def sizes(self) -> range:
        return range(self.size_min, self.size_max + 1, self.size_step)

    def stride_for(self, size: int) -> int:
        return size if self.stride is None else max(self.stride, size)


def replication_spec(**overrides) -> SweepSpec:
    """Sizes 16..700, stride fixed at 700, caches flushed between calls."""
    settings = dict(size_min=16, size_max=700, size_step=4, stride=REPLICATION_STRIDE, flush=True)
    settings.update(overrides)
    return SweepSpec(**settings)


def run_sweep(spec: SweepSpec, on_record=None) -> list[BenchRecord]:
    """One square-problem record per (size, variant); failed points are logged and skipped."""
    records = []
    for size in spec.sizes():
        for variant in spec.variants:
            try:
                record = time_gemm(
                    variant,
                    Dims(size, size, size),
                    spec.stride_for(size),
                    spec.reps,
                    spec.flush,
                    config=spec.config,
                    seed=spec.seed,
                    flush_bytes=spec.flush_bytes,
                )
            except Exception as exc:
                log.error("size %d variant %s failed: %s", size, variant.value, exc)
                continue
            records.append(record)
            if on_record is not None:
                on_record(record)
    return records
