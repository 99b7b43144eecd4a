"""Oracle-equivalence checks of the blocked GEMM against two independent references.

Each case multiplies random [-1, 1] operands and compares the blocked
result with

* a float64 product computed by numpy from the same float32 inputs,
  tolerance ``4 * K * 2**-24``;
* the float32 naive triple loop, tolerance ``8 * K * 2**-24``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import BlockingConfig
from .gemm import KernelVariant, gemm, gemm_naive
from .matrix import MatrixView, random_matrix

EPS32 = 2.0**-24
ALPHAS = (0.0, 1.0, -1.0, 0.5)
BETAS = (0.0, 1.0, 2.0)
STRIDE_MODES = ("tight", "padded", "700")
DIAGONAL_SIZES = tuple(range(1, 65)) + (100, 160, 335, 336, 337, 341, 512, 700)


def stride_for(mode: str, cols: int) -> int | None:
    """Row stride for a matrix with ``cols`` columns; None when the mode is not legal."""
    if mode == "tight":
        return cols
    if mode == "padded":
        return cols + 3
    if mode == "700":
        return 700 if cols <= 700 else None
    raise ValueError(f"unknown stride mode {mode!r}")


def legal_modes(M: int, N: int, K: int) -> list[str]:
    return [m for m in STRIDE_MODES if stride_for(m, max(N, K)) is not None]


def oracle_f64(alpha, A: MatrixView, B: MatrixView, beta, C_old: MatrixView) -> np.ndarray:
    """alpha * A @ B + beta * C in float64; beta == 0 ignores C."""
    product = float(np.float32(alpha)) * (A.as_array().astype(np.float64) @ B.as_array().astype(np.float64))
    if np.float32(beta) == 0:
        return product
    return product + float(np.float32(beta)) * C_old.as_array().astype(np.float64)


@dataclass(frozen=True)
class CaseResult:
    M: int
    N: int
    K: int
    stride_mode: str
    alpha: float
    beta: float
    err_double: float
    err_naive: float

    @property
    def tol_double(self) -> float:
        return 4 * self.K * EPS32

    @property
    def tol_naive(self) -> float:
        return 8 * self.K * EPS32

    @property
    def ok(self) -> bool:
        return self.err_double <= self.tol_double and self.err_naive <= self.tol_naive


def check_case(
    M: int,
    N: int,
    K: int,
    stride_mode: str = "tight",
    alpha: float = 1.0,
    beta: float = 0.0,
    seed: int = 0,
    variant=KernelVariant.BLOCKED_VECTOR,
    config: BlockingConfig | None = None,
    gemm_fn=gemm,
) -> CaseResult:
    rng = np.random.default_rng(seed)
    a_seed, b_seed, c_seed = (int(s) for s in rng.integers(0, 2**31, size=3))
    A = random_matrix(M, K, stride_for(stride_mode, K), a_seed)
    B = random_matrix(K, N, stride_for(stride_mode, N), b_seed)
    C_old = random_matrix(M, N, stride_for(stride_mode, N), c_seed)
    C = C_old.copy()
    gemm_fn(alpha, A, B, beta, C, config=config, variant=variant)
    C_naive = C_old.copy()
    gemm_naive(alpha, A, B, beta, C_naive)
    got = C.as_array().astype(np.float64)
    exact = oracle_f64(alpha, A, B, beta, C_old)
    return CaseResult(
        M, N, K, stride_mode, alpha, beta,
        float(np.abs(got - exact).max()),
        float(np.abs(got - C_naive.as_array()).max()),
    )


@dataclass
class VerifyReport:
    cases: int = 0
    failures: list = field(default_factory=list)
    max_err_double: float = 0.0
    max_err_naive: float = 0.0
    #: largest error as a fraction of its tolerance
    worst_ratio: float = 0.0

    def add(self, result: CaseResult) -> None:
        self.cases += 1
        self.max_err_double = max(self.max_err_double, result.err_double)
        self.max_err_naive = max(self.max_err_naive, result.err_naive)
        self.worst_ratio = max(
            self.worst_ratio,
            result.err_double / result.tol_double,
            result.err_naive / result.tol_naive,
        )
        if not result.ok:
            self.failures.append(result)

    @property
    def ok(self) -> bool:
        return not self.failures


def sample_triples(max_size: int, samples: int, seed: int) -> list[tuple[int, int, int]]:
    """``samples`` distinct random (M, N, K) in 1..max_size, or the whole cube if it is smaller."""
    total = max_size**3
    if samples >= total:
        return list(itertools.product(range(1, max_size + 1), repeat=3))
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=samples, replace=False)
    return [(int(f // max_size**2) + 1, int(f // max_size % max_size) + 1, int(f % max_size) + 1) for f in flat]


def run_verification(
    max_size: int = 48,
    samples: int = 2000,
    diagonal=DIAGONAL_SIZES,
    seed: int = 0,
    variant=KernelVariant.BLOCKED_VECTOR,
    config: BlockingConfig | None = None,
    full_scalars_up_to: int = 64,
) -> VerifyReport:
    """Random cube samples plus the square diagonal, over every legal stride mode.

    Every sampled triple and every diagonal size up to
    ``full_scalars_up_to`` runs all alpha/beta pairs. Larger diagonal sizes
    run one pair per stride mode, rotating through the pairs.
    """
    report = VerifyReport()
    pairs = list(itertools.product(ALPHAS, BETAS))
    case_seed = itertools.count(seed * 1_000_003)
    for M, N, K in sample_triples(max_size, samples, seed):
        for mode in legal_modes(M, N, K):
            for alpha, beta in pairs:
                report.add(check_case(M, N, K, mode, alpha, beta, next(case_seed), variant, config))
    # alpha varies fastest and alpha == 0 comes last, so consecutive large
    # cases exercise the full product path under different scalings
    rotation = itertools.cycle([(a, b) for b in BETAS[::-1] for a in ALPHAS[1:] + ALPHAS[:1]])
    for size in diagonal:
        for mode in legal_modes(size, size, size):
            chosen = pairs if size <= full_scalars_up_to else [next(rotation)]
            for alpha, beta in chosen:
                report.add(check_case(size, size, size, mode, alpha, beta, next(case_seed), variant, config))
    return report
