"""CSV, plot-data and summary renderings of benchmark records."""

from __future__ import annotations

import csv
import io
from collections import defaultdict

import numpy as np

from ..gemm import KernelVariant
from .timing import BenchRecord

CSV_FIELDS = ("variant", "M", "N", "K", "stride", "reps", "seconds", "mflops")
FORMATS = ("csv", "plotdata", "summary")
#: Sizes at or below this are excluded from the summary mean.
SUMMARY_MIN_SIZE = 100


def _require(records) -> list[BenchRecord]:
    records = list(records)
    if not records:
        raise ValueError("no benchmark records to report")
    return records


def to_csv(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in _require(records):
        # repr() of a float round-trips exactly
        writer.writerow([r.variant.value, r.M, r.N, r.K, r.stride, r.reps, repr(r.seconds), repr(r.mflops)])
    return out.getvalue()


def parse_csv(text: str) -> list[BenchRecord]:
    rows = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    if tuple(rows.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {rows.fieldnames}")
    return [
        BenchRecord(
            KernelVariant(row["variant"]),
            int(row["M"]),
            int(row["N"]),
            int(row["K"]),
            int(row["stride"]),
            int(row["reps"]),
            float(row["seconds"]),
            float(row["mflops"]),
        )
        for row in rows
    ]


def _by_variant(records) -> dict:
    groups = defaultdict(list)
    for r in records:
        groups[r.variant].append(r)
    return groups


def to_plotdata(records) -> str:
    blocks = []
    for variant, rows in _by_variant(_require(records)).items():
        lines = [f"# {variant.value}", "# size mflops"]
        lines += [f"{r.M} {r.mflops!r}" for r in sorted(rows, key=lambda r: r.M)]
        blocks.append("\n".join(lines))
    # two blank lines separate gnuplot data sets
    return "\n\n\n".join(blocks) + "\n"


def summarize(records) -> dict:
    """Per-variant mean MFLOPS over sizes > 100 and peak, plus blocked/naive ratios per size."""
    groups = _by_variant(_require(records))
    variants = {}
    for variant, rows in groups.items():
        large = [r.mflops for r in rows if r.M > SUMMARY_MIN_SIZE]
        peak = max(rows, key=lambda r: r.mflops)
        variants[variant] = {
            "mean_mflops": float(np.mean(large)) if large else float("nan"),
            "peak_mflops": peak.mflops,
            "peak_size": peak.M,
            "points": len(rows),
        }
    ratios = {}
    naive = {r.M: r.mflops for r in groups.get(KernelVariant.NAIVE, ())}
    for variant in (KernelVariant.BLOCKED_SCALAR, KernelVariant.BLOCKED_VECTOR):
        for r in groups.get(variant, ()):
            if r.M in naive:
                ratios.setdefault(r.M, {})[variant] = r.mflops / naive[r.M]
    return {"variants": variants, "ratios_vs_naive": ratios}


def to_summary(records) -> str:
    summary = summarize(records)
    lines = [f"{'variant':<8} {'mean>100':>12} {'peak':>12} {'at':>5} {'points':>6}"]
    for variant, s in summary["variants"].items():
        lines.append(
            f"{variant.value:<8} {s['mean_mflops']:12.1f} {s['peak_mflops']:12.1f} "
            f"{s['peak_size']:5d} {s['points']:6d}"
        )
    if summary["ratios_vs_naive"]:
        lines.append("")
        lines.append("size  " + "  ".join(f"{v.value}/naive" for v in (KernelVariant.BLOCKED_SCALAR, KernelVariant.BLOCKED_VECTOR)))
        for size in sorted(summary["ratios_vs_naive"]):
            row = summary["ratios_vs_naive"][size]
            cells = [
                f"{row[v]:12.2f}" if v in row else f"{'-':>12}"
                for v in (KernelVariant.BLOCKED_SCALAR, KernelVariant.BLOCKED_VECTOR)
            ]
            lines.append(f"{size:<5} " + " ".join(cells))
    return "\n".join(lines) + "\n"


def emit_report(records, format: str = "csv") -> str:
    if format == "csv":
        return to_csv(records)
    if format == "plotdata":
        return to_plotdata(records)
    if format == "summary":
        return to_summary(records)
    raise ValueError(f"unknown report format {format!r}; choose from {FORMATS}")
