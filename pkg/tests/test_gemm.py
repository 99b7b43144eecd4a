import dataclasses
import itertools

import numpy as np
import pytest

from blockgemm import (
    AliasingError,
    Axis,
    CacheGeometry,
    ConfigError,
    KernelVariant,
    LoopOrder,
    MatrixView,
    ShapeMismatchError,
    default_config,
    gemm,
    gemm_dispatch,
    gemm_naive,
    host_config,
    matrix_filled,
    random_matrix,
)
from blockgemm.verify import check_case, oracle_f64

from conftest import bits

EPS = 2.0**-24
VARIANTS = list(KernelVariant)
BLOCKED = [KernelVariant.BLOCKED_SCALAR, KernelVariant.BLOCKED_VECTOR]
STRIDE_MODES_SEED = {"tight": 11, "padded": 12, "700": 13}


def zeros(m, n, stride=None):
    return matrix_filled(m, n, n if stride is None else stride, lambda i, j: 0)


def operands(m, n, k, stride=None, seed=0):
    s = (lambda cols: cols) if stride is None else (lambda cols: stride(cols))
    return (
        random_matrix(m, k, s(k), seed),
        random_matrix(k, n, s(n), seed + 1),
        random_matrix(m, n, s(n), seed + 2),
    )


@pytest.mark.parametrize("variant", VARIANTS)
def test_two_by_two(variant):
    A = MatrixView.from_array([[1, 2], [3, 4]])
    B = MatrixView.from_array([[5, 6], [7, 8]])
    C = zeros(2, 2)
    gemm_dispatch(variant, 1.0, A, B, 0.0, C)
    assert C.as_array().tolist() == [[19, 22], [43, 50]]


@pytest.mark.parametrize("variant", VARIANTS)
def test_identity(variant):
    A = MatrixView.from_array(np.eye(3))
    B = random_matrix(3, 3, 7, seed=9)
    C = zeros(3, 3)
    gemm(1.0, A, B, 0.0, C, variant=variant)
    assert np.array_equal(C.as_array(), B.as_array())


@pytest.mark.parametrize("variant", VARIANTS)
def test_alpha_zero_scales_c(variant):
    A, B, _ = operands(2, 2, 2)
    A.as_array()[0, 0] = np.inf
    C = matrix_filled(2, 2, 2, lambda i, j: 1)
    gemm(0.0, A, B, 2.0, C, variant=variant)
    assert C.as_array().tolist() == [[2, 2], [2, 2]]


@pytest.mark.parametrize("variant", VARIANTS)
def test_beta_zero_ignores_nan(variant):
    A, B, _ = operands(7, 9, 20)
    C = matrix_filled(7, 9, 9, lambda i, j: np.nan)
    gemm(1.0, A, B, 0.0, C, variant=variant)
    assert np.isfinite(C.as_array()).all()


@pytest.mark.parametrize("variant", VARIANTS)
def test_single_element(variant):
    A = MatrixView.from_array([[0.75]])
    B = MatrixView.from_array([[-0.5]])
    C = MatrixView.from_array([[0.25]])
    gemm(2.0, A, B, 3.0, C, variant=variant)
    expected = np.float32(2.0) * np.float32(0.75 * -0.5) + np.float32(3.0) * np.float32(0.25)
    assert C[0, 0] == expected


@pytest.mark.parametrize("size", [16, 336])
def test_square_against_oracles(size):
    for alpha, beta in [(1.0, 0.0), (-1.0, 1.0), (0.5, 2.0)]:
        r = check_case(size, size, size, "tight", alpha, beta, seed=size)
        assert r.ok, r


def test_edge_337_stride_700():
    # K padding, 337 mod 5 = 2 ghost columns and a partial L2 row block at once
    r = check_case(337, 337, 337, "700", 1.0, 1.0, seed=5)
    assert r.ok, r


def test_scalar_and_vector_bit_identical():
    rng = np.random.default_rng(77)
    for _ in range(20):
        m, n, k = (int(x) for x in rng.integers(1, 120, 3))
        A, B, C0 = operands(m, n, k, seed=int(rng.integers(1 << 20)))
        outs = []
        for variant in BLOCKED:
            C = C0.copy()
            gemm(0.5, A, B, 2.0, C, variant=variant)
            outs.append(bits(C.data))
        assert np.array_equal(*outs)


@pytest.mark.slow
@pytest.mark.parametrize("stride_mode", ["tight", "padded", "700"])
def test_exhaustive_cube(stride_mode):
    """Every (M, N, K) in 1..48 against the float64 product, beta = 0."""
    size = 48
    stride = {"tight": None, "padded": lambda c: c + 3, "700": lambda c: 700}[stride_mode]
    rng = np.random.default_rng(STRIDE_MODES_SEED[stride_mode])
    worst = 0.0
    for m, n, k in itertools.product(range(1, size + 1), repeat=3):
        s_a = k if stride is None else stride(k)
        s_b = n if stride is None else stride(n)
        A = MatrixView(rng.uniform(-1, 1, (m - 1) * s_a + k).astype(np.float32), m, k, s_a)
        B = MatrixView(rng.uniform(-1, 1, (k - 1) * s_b + n).astype(np.float32), k, n, s_b)
        C = MatrixView(np.zeros((m - 1) * s_b + n, np.float32), m, n, s_b)
        gemm(1.0, A, B, 0.0, C)
        exact = oracle_f64(1.0, A, B, 0.0, C)
        scale = np.abs(A.as_array()).max() * np.abs(B.as_array()).max()
        err = np.abs(C.as_array() - exact).max()
        assert err <= 4 * k * EPS * scale, (m, n, k)
        worst = max(worst, err / (4 * k * EPS * scale))
    assert worst < 1


def test_accumulating_twice_equals_doubled_b():
    A, B, _ = operands(50, 47, 400, seed=3)
    C = zeros(50, 47)
    gemm(1.0, A, B, 1.0, C)
    gemm(1.0, A, B, 1.0, C)
    B2 = MatrixView.from_array(2 * B.as_array())
    C2 = zeros(50, 47)
    gemm(1.0, A, B2, 1.0, C2)
    assert np.abs(C.as_array() - C2.as_array()).max() <= 2 * 4 * 400 * EPS


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 9, 337])
def test_canary_beyond_n_untouched(variant, n):
    m, k, stride = 13, 37, n + 7
    A = random_matrix(m, k, seed=1)
    B = random_matrix(k, n, seed=2)
    C = MatrixView(np.full(m * stride, -12345.0, np.float32), m, n, stride)
    C.as_array()[...] = 0
    gemm(1.0, A, B, 1.0, C, variant=variant)
    canary = C.data.reshape(m, stride)[:, n:]
    assert np.all(canary == -12345.0)


def test_deterministic():
    A, B, C0 = operands(123, 77, 400, seed=8)
    out = []
    for _ in range(2):
        C = C0.copy()
        gemm(1.0, A, B, 1.0, C)
        out.append(C.data.tobytes())
    assert out[0] == out[1]


def test_all_l2_loop_orders_bit_identical():
    A, B, C0 = operands(230, 215, 700, seed=4)
    results = []
    for outer, inner in itertools.permutations(Axis, 2):
        cfg = dataclasses.replace(default_config(), l2_loop_order=LoopOrder(outer, inner))
        C = C0.copy()
        gemm(1.0, A, B, 2.0, C, config=cfg)
        results.append(bits(C.data))
    assert all(np.array_equal(results[0], r) for r in results[1:])
    assert check_case(230, 215, 700, "tight", 1.0, 2.0, seed=4).ok


@pytest.mark.parametrize(
    "config",
    [
        host_config(CacheGeometry(32 * 1024, 8)),
        dataclasses.replace(default_config(), unroll=8, l1_k=328, l2_k=328),
        dataclasses.replace(default_config(), l2_m=7, l2_n=10, l1_k=16, l2_k=16),
    ],
    ids=["host-32k-8way", "unroll8", "tiny-blocks"],
)
def test_other_configs(config):
    for m, n, k in [(37, 41, 353), (5, 5, 16), (100, 3, 161)]:
        A, B, C0 = operands(m, n, k, seed=m)
        outs = []
        for variant in BLOCKED:
            r = check_case(m, n, k, "padded", 1.0, 1.0, seed=k, variant=variant, config=config)
            assert r.ok, r
            C = C0.copy()
            gemm(1.0, A, B, 1.0, C, config=config, variant=variant)
            outs.append(bits(C.data))
        assert np.array_equal(*outs)


def test_prefetch_toggle_same_result():
    A, B, C0 = operands(64, 64, 512, seed=6)
    C1, C2 = C0.copy(), C0.copy()
    gemm(1.0, A, B, 1.0, C1, prefetch_distance=32)
    gemm(1.0, A, B, 1.0, C2, prefetch_distance=None)
    assert np.array_equal(bits(C1.data), bits(C2.data))


def test_naive_is_sequential_float32():
    A, B, C = operands(3, 4, 50, seed=2)
    C.as_array()[...] = 0
    gemm_naive(1.0, A, B, 0.0, C)
    a, b = A.as_array(), B.as_array()
    for i in range(3):
        for j in range(4):
            s = np.float32(0)
            for z in range(50):
                s = np.float32(s + np.float32(a[i, z] * b[z, j]))
            assert C[i, j] == s


@pytest.mark.parametrize("variant", VARIANTS)
def test_shape_mismatch_leaves_c(variant):
    A = random_matrix(4, 5, seed=1)
    B = random_matrix(6, 3, seed=2)
    C = random_matrix(4, 3, seed=3)
    before = C.data.copy()
    with pytest.raises(ShapeMismatchError):
        gemm(1.0, A, B, 1.0, C, variant=variant)
    assert np.array_equal(C.data, before)


def test_aliasing_rejected():
    buf = np.zeros(200, np.float32)
    A = MatrixView(buf[:100], 10, 10, 10)
    C = MatrixView(buf[50:150], 10, 10, 10)
    B = random_matrix(10, 10, seed=0)
    with pytest.raises(AliasingError):
        gemm(1.0, A, B, 0.0, C)
    with pytest.raises(AliasingError):
        gemm_naive(1.0, B, A, 0.0, MatrixView(buf, 10, 10, 10))


def test_disjoint_views_of_one_buffer_allowed():
    buf = np.zeros(200, np.float32)
    A = MatrixView(buf[:100], 10, 10, 10)
    C = MatrixView(buf[100:], 10, 10, 10)
    A.as_array()[...] = np.eye(10)
    gemm(1.0, A, A, 0.0, C)
    assert np.array_equal(C.as_array(), np.eye(10))


@pytest.mark.parametrize(
    "change",
    [{"l1_n": 4}, {"l2_k": 672}, {"l1_loop_order": LoopOrder(Axis.ROWS_OF_A, Axis.COLS_OF_B)}],
)
def test_unsupported_blocking_rejected(change):
    cfg = dataclasses.replace(default_config(), **change)
    A, B, C = operands(8, 8, 8)
    before = C.data.copy()
    with pytest.raises(ConfigError):
        gemm(1.0, A, B, 1.0, C, config=cfg)
    assert np.array_equal(C.data, before)
    # the naive loop does not use the blocking parameters
    gemm(1.0, A, B, 1.0, C, config=cfg, variant=KernelVariant.NAIVE)
