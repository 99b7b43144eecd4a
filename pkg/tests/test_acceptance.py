"""Exit criteria for the library, one test per criterion.

Each test appends a PASS/FAIL line to the "acceptance criteria" section of
the pytest terminal summary.
"""

import itertools
import time

import numpy as np

from blockgemm import (
    CacheGeometry,
    Dims,
    KernelVariant,
    MatrixView,
    default_config,
    derive_l1_k,
    flop_count,
    gemm,
    microkernel,
    microkernel_reference,
    random_matrix,
)
from blockgemm.bench import cli, timing
from blockgemm.bench.report import emit_report, parse_csv
from blockgemm.bench.timing import BenchRecord, time_gemm
from blockgemm.verify import ALPHAS, BETAS, DIAGONAL_SIZES, VerifyReport, check_case, legal_modes, run_verification

from conftest import ACCEPTANCE_LINES, bits, random_panel


def report(number: int, name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def test_1_oracle_equivalence():
    start = time.perf_counter()
    result = run_verification(max_size=48, samples=2000, diagonal=DIAGONAL_SIZES, seed=2024)
    elapsed = time.perf_counter() - start
    ok = result.ok and elapsed < 300
    report(
        1,
        "oracle equivalence",
        ok,
        f"{result.cases} cases, {len(result.failures)} failures, worst err/tol {result.worst_ratio:.3f}, "
        f"max |C-f64| {result.max_err_double:.2e}, max |C-naive| {result.max_err_naive:.2e}, {elapsed:.0f}s",
    )


def test_2_bit_exactness():
    rng = np.random.default_rng(10_000)
    mismatches = 0
    for k_padded in (16, 336, 352):
        for _ in range(10_000):
            panel = random_panel(rng, k_padded)
            a = rng.uniform(-1, 1, k_padded).astype(np.float32)
            v = microkernel(a, panel).values
            r = microkernel_reference(a, panel).values
            mismatches += not np.array_equal(bits(v), bits(r))
    gemm_mismatches = 0
    for trial in range(100):
        m, n = (int(x) for x in rng.integers(1, 160, 2))
        k = int(rng.integers(1, 720))
        alpha = float(rng.choice(ALPHAS[1:]))
        beta = float(rng.choice(BETAS))
        A = random_matrix(m, k, seed=3 * trial)
        B = random_matrix(k, n, seed=3 * trial + 1)
        C0 = random_matrix(m, n, seed=3 * trial + 2)
        out = []
        for variant in (KernelVariant.BLOCKED_SCALAR, KernelVariant.BLOCKED_VECTOR):
            C = C0.copy()
            gemm(alpha, A, B, beta, C, variant=variant)
            out.append(bits(C.data))
        gemm_mismatches += not np.array_equal(*out)
    report(
        2,
        "kernel bit-exactness",
        mismatches == 0 and gemm_mismatches == 0,
        f"{mismatches}/30000 microkernel mismatches, {gemm_mismatches}/100 GEMM mismatches",
    )


def test_3_capacity_model():
    k = derive_l1_k(CacheGeometry(16 * 1024, 2, 4), 5, 0.83, 16)
    cfg = default_config()
    values = (cfg.l1_m, cfg.l1_n, cfg.l1_k, cfg.l2_m, cfg.l2_n, cfg.l2_k)
    report(3, "capacity model", k == 336 and values == (1, 5, 336, 100, 100, 336), f"k'={k}, params={values}")


def test_4_flop_accounting():
    flops = flop_count(Dims(320, 320, 320))
    rec = BenchRecord.from_timing("vector", Dims(320, 320, 320), 700, 5, 0.0736)
    measured = time_gemm("vector", Dims(320, 320, 320), stride=700, reps=3)
    exact = rec.mflops == flops / (0.0736 * 1e6) and measured.mflops == flops / (measured.seconds * 1e6)
    report(
        4,
        "flop accounting",
        flops == 65_536_000 and exact,
        f"2MNK={flops}, 0.0736s -> {rec.mflops:.1f} MFLOPS, measured {measured.mflops:.0f} MFLOPS",
    )


def test_5_relative_performance():
    naive = time_gemm("naive", Dims(512, 512, 512), stride=512, reps=5, flush=True)
    vector = time_gemm("vector", Dims(512, 512, 512), stride=512, reps=5, flush=True)
    scalar336 = time_gemm("scalar", Dims(336, 336, 336), stride=336, reps=5, flush=True)
    vector336 = time_gemm("vector", Dims(336, 336, 336), stride=336, reps=5, flush=True)
    r1 = vector.mflops / naive.mflops
    r2 = vector336.mflops / scalar336.mflops
    report(
        5,
        "relative performance",
        r1 >= 5.0 and r2 >= 1.2,
        f"vector/naive at 512 = {r1:.2f} (floor 5), vector/scalar at 336 = {r2:.2f} (floor 1.2); "
        f"vector {vector.mflops:.0f} MFLOPS",
    )


EDGE_CASES = [
    (40, 45, 337),  # K padding
    (40, 337, 40),  # N mod 5 == 2
    (1, 90, 60),
    (1, 1, 1),
    (70, 65, 1),
] + [(50, n, 50) for n in range(1, 5)] + [(9, n, 337) for n in range(1, 5)]


def test_6_edge_cases():
    result = VerifyReport()
    seeds = itertools.count(600)
    for m, n, k in EDGE_CASES:
        for mode in legal_modes(m, n, k):
            for alpha, beta in itertools.product(ALPHAS, BETAS):
                result.add(check_case(m, n, k, mode, alpha, beta, next(seeds)))
    canary_hits = 0
    for m, n, k in EDGE_CASES:
        stride = n + 5
        C = MatrixView(np.full(m * stride, 7.25, np.float32), m, n, stride)
        C.as_array()[...] = 0
        gemm(1.0, random_matrix(m, k, seed=m), random_matrix(k, n, seed=n), 1.0, C)
        canary_hits += int(np.count_nonzero(C.data.reshape(m, stride)[:, n:] != 7.25))
    report(
        6,
        "edge cases",
        result.ok and canary_hits == 0,
        f"{result.cases} cases, {len(result.failures)} failures, worst err/tol {result.worst_ratio:.3f}, "
        f"{canary_hits} canary elements overwritten",
    )


def test_7_benchmark_protocol(monkeypatch, capsys):
    events = []
    real_flush, real_clock = timing.flush_caches, timing.clock

    def flush(n):
        events.append("flush")
        return real_flush(n)

    def clock():
        events.append("clock")
        return real_clock()

    monkeypatch.setattr(timing, "flush_caches", flush)
    monkeypatch.setattr(timing, "clock", clock)
    rc = cli.main(["sweep", "--replicate", "--max", "40", "--reps", "2"])
    csv_text = capsys.readouterr().out
    records = parse_csv(csv_text)
    # every timed call is bracketed by two clock reads right after a flush
    expected_events = ["flush", "clock", "clock"] * (len(records) * 2)
    round_trip = emit_report(records, "csv") == csv_text and parse_csv(emit_report(records, "csv")) == records
    ok = (
        rc == 0
        and [r.M for r in records[::3]] == list(range(16, 41, 4))
        and {r.variant for r in records} == set(KernelVariant)
        and all(r.stride == 700 for r in records)
        and events == expected_events
        and time.get_clock_info("perf_counter").monotonic
        and real_clock is time.perf_counter
        and round_trip
    )
    report(
        7,
        "benchmark protocol",
        ok,
        f"{len(records)} records, strides {sorted({r.stride for r in records})}, "
        f"{events.count('flush')} flushes for {len(records) * 2} timed calls, round-trip {round_trip}",
    )
