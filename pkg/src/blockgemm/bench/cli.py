"""``bench`` command line: sweep, single and verify."""

from __future__ import annotations

import argparse
import logging
import sys

from ..config import PIII_L2_BYTES, load_config, parse_config_text
from ..gemm import KernelVariant
from ..matrix import Dims
from ..verify import run_verification
from .report import FORMATS, emit_report
from .timing import REPLICATION_STRIDE, SweepSpec, pin_to_cpu, run_sweep, time_gemm

log = logging.getLogger("blockgemm.bench")


def _variants(text: str) -> tuple[KernelVariant, ...]:
    try:
        return tuple(KernelVariant(v.strip()) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _flush_bytes(args) -> int:
    if args.flush_bytes is not None:
        return args.flush_bytes
    l2 = PIII_L2_BYTES
    if args.config:
        with open(args.config) as fh:
            l2 = parse_config_text(fh.read()).get("l2_capacity_bytes", l2)
    return 4 * l2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description="Time and verify the blocked SGEMM.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value cache geometry file")
    common.add_argument("--reps", type=int, default=5)
    common.add_argument("--flush", action=argparse.BooleanOptionalAction, default=True,
                        help="flush caches before every timed call (default: on)")
    common.add_argument("--flush-bytes", type=int, default=None,
                        help="flush buffer size (default: 4x the configured L2)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--no-pin", action="store_true", help="do not pin to one CPU")
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    sweep = sub.add_parser("sweep", parents=[common], help="square sizes from --min to --max")
    sweep.add_argument("--min", type=int, default=None, help="smallest size (default 16)")
    sweep.add_argument("--max", type=int, default=None, help="largest size (default 700)")
    sweep.add_argument("--step", type=int, default=None, help="size increment (default 4)")
    sweep.add_argument("--stride", type=int, default=None,
                       help=f"fixed row stride (default: each size; {REPLICATION_STRIDE} with --replicate)")
    sweep.add_argument("--allow-small-stride", action="store_true",
                       help="sizes beyond --stride use stride == size instead of failing")
    sweep.add_argument("--variants", type=_variants, default=tuple(KernelVariant))
    sweep.add_argument("--replicate", action="store_true",
                       help=f"replication mode: stride {REPLICATION_STRIDE} and flushing always on")

    single = sub.add_parser("single", parents=[common], help="one problem size")
    single.add_argument("--m", type=int, required=True)
    single.add_argument("--n", type=int, required=True)
    single.add_argument("--k", type=int, required=True)
    single.add_argument("--stride", type=int, default=None)
    single.add_argument("--variant", type=KernelVariant, default=KernelVariant.BLOCKED_VECTOR)

    verify = sub.add_parser("verify", help="blocked GEMM vs float64 and naive oracles")
    verify.add_argument("--max-size", type=int, default=48)
    verify.add_argument("--samples", type=int, default=2000)
    verify.add_argument("--no-diagonal", action="store_true", help="skip the large square sizes")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--config", help="key=value cache geometry file")
    return parser


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pin(args) -> None:
    pinned = False if args.no_pin else pin_to_cpu()
    print(f"# pinned={pinned}", file=sys.stderr)


def cmd_sweep(args) -> int:
    config = load_config(args.config) if args.config else None
    if args.replicate:
        if args.stride not in (None, REPLICATION_STRIDE) or not args.flush:
            log.warning("replication mode always uses stride %d with flushing", REPLICATION_STRIDE)
        stride, flush = REPLICATION_STRIDE, True
    else:
        stride, flush = args.stride, args.flush
    spec = SweepSpec(
        16 if args.min is None else args.min,
        700 if args.max is None else args.max,
        4 if args.step is None else args.step,
        stride,
        args.variants,
        args.reps,
        flush,
        args.seed,
        args.allow_small_stride,
        _flush_bytes(args),
        config,
    )
    _pin(args)
    records = run_sweep(spec, on_record=lambda r: log.info("%s %d: %.1f MFLOPS", r.variant.value, r.M, r.mflops))
    if not records:
        log.error("every sweep point failed")
        return 1
    _write(emit_report(records, args.format), args.output)
    return 0 if len(records) == len(spec.sizes()) * len(spec.variants) else 1


def cmd_single(args) -> int:
    config = load_config(args.config) if args.config else None
    _pin(args)
    record = time_gemm(args.variant, Dims(args.m, args.n, args.k), args.stride, args.reps, args.flush,
                       config=config, seed=args.seed, flush_bytes=_flush_bytes(args))
    _write(emit_report([record], args.format), args.output)
    return 0


def cmd_verify(args) -> int:
    config = load_config(args.config) if args.config else None
    kwargs = {"diagonal": ()} if args.no_diagonal else {}
    report = run_verification(args.max_size, args.samples, seed=args.seed, config=config, **kwargs)
    print(f"cases:           {report.cases}")
    print(f"max |C - f64|:   {report.max_err_double:.3e}")
    print(f"max |C - naive|: {report.max_err_naive:.3e}")
    print(f"worst err/tol:   {report.worst_ratio:.3f}")
    for f in report.failures[:20]:
        print(f"FAIL {f.M}x{f.N}x{f.K} {f.stride_mode} alpha={f.alpha} beta={f.beta}: "
              f"f64 {f.err_double:.3e}/{f.tol_double:.3e} naive {f.err_naive:.3e}/{f.tol_naive:.3e}")
    print("PASS" if report.ok else f"FAIL ({len(report.failures)} cases)")
    return 0 if report.ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"sweep": cmd_sweep, "single": cmd_single, "verify": cmd_verify}[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2
