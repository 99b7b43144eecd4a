"""Benchmark harness: timed GEMM sweeps and their reports."""

from .report import emit_report, parse_csv, summarize
from .timing import (
    BenchRecord,
    SweepSpec,
    flush_caches,
    replication_spec,
    pin_to_cpu,
    run_sweep,
    time_gemm,
)

__all__ = [
    "BenchRecord",
    "SweepSpec",
    "emit_report",
    "flush_caches",
    "replication_spec",
    "parse_csv",
    "pin_to_cpu",
    "run_sweep",
    "summarize",
    "time_gemm",
]
