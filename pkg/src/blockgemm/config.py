"""Blocking parameters and the L1 capacity model that sizes them."""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import CacheTooSmallError, ConfigError
from .simd import WIDTH

KIB = 1024


class Axis(str, enum.Enum):
    ROWS_OF_A = "rows-of-A"
    COLS_OF_B = "cols-of-B"
    COMMON_K = "common-K"


@dataclass(frozen=True)
class LoopOrder:
    """Which axis the outermost and innermost loop of a blocking level walk.

    The middle loop takes whichever axis is left over.
    """

    outer: Axis
    inner: Axis

    def __post_init__(self):
        object.__setattr__(self, "outer", Axis(self.outer))
        object.__setattr__(self, "inner", Axis(self.inner))
        if self.outer == self.inner:
            raise ConfigError(f"loop order needs two different axes, got {self.outer.value} twice")

    @property
    def middle(self) -> Axis:
        (rest,) = set(Axis) - {self.outer, self.inner}
        return rest

    def nesting(self) -> tuple[Axis, Axis, Axis]:
        return self.outer, self.middle, self.inner


@dataclass(frozen=True)
class CacheGeometry:
    capacity_bytes: int
    ways: int = 1
    element_bytes: int = 4

    def __post_init__(self):
        if self.capacity_bytes < 1 or self.ways < 1 or self.element_bytes < 1:
            raise ConfigError(f"cache geometry fields must be positive: {self}")
        if self.capacity_bytes % self.ways:
            raise ConfigError(
                f"capacity {self.capacity_bytes} B is not divisible by {self.ways} ways"
            )

    @property
    def bank_elements(self) -> int:
        """Elements that fit in a single way."""
        return self.capacity_bytes // self.ways // self.element_bytes


PIII_L1 = CacheGeometry(16 * KIB, ways=2)
PIII_L2_BYTES = 512 * KIB


@dataclass(frozen=True)
class BlockingConfig:
    """Two-level blocking parameters.

    ``l2_*`` size the block of A, B and C kept in L2; ``l1_*`` size the
    register tile (``l1_m`` x ``l1_n``) and the dot-product length that the
    packed B panel holds in L1.
    """

    l2_m: int = 100
    l2_n: int = 100
    l2_k: int = 336
    l1_m: int = 1
    l1_n: int = 5
    l1_k: int = 336
    unroll: int = 16
    utilization: float = 0.83
    l2_loop_order: LoopOrder = field(default_factory=lambda: LoopOrder(Axis.COLS_OF_B, Axis.COMMON_K))
    l1_loop_order: LoopOrder = field(default_factory=lambda: LoopOrder(Axis.COLS_OF_B, Axis.ROWS_OF_A))

    def __post_init__(self):
        for name in ("l2_m", "l2_n", "l2_k", "l1_m", "l1_n", "l1_k", "unroll"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.l1_m != 1:
            raise ConfigError(f"the microkernel computes one row at a time; l1_m must be 1, got {self.l1_m}")
        if self.unroll % WIDTH:
            raise ConfigError(f"unroll {self.unroll} is not a multiple of the vector width {WIDTH}")
        if self.l1_k % self.unroll:
            raise ConfigError(f"l1_k {self.l1_k} is not a multiple of unroll {self.unroll}")
        if self.l1_k > self.l2_k:
            raise ConfigError(f"l1_k {self.l1_k} exceeds l2_k {self.l2_k}")
        if self.l1_n > self.l2_n:
            raise ConfigError(f"l1_n {self.l1_n} exceeds l2_n {self.l2_n}")
        if not 0.0 < self.utilization <= 1.0:
            raise ConfigError(f"utilization must lie in (0, 1], got {self.utilization}")


def derive_l1_k(geometry: CacheGeometry, n_prime: int, utilization: float, unroll: int) -> int:
    """Longest dot product whose ``n_prime`` packed B columns fit in one cache way.

    Only ``utilization`` of the way is budgeted for matrix data; the result
    is rounded down to a multiple of ``unroll``.
    """
    if n_prime < 1 or unroll < 1:
        raise ConfigError("n_prime and unroll must be positive")
    if not 0.0 < utilization <= 1.0:
        raise ConfigError(f"utilization must lie in (0, 1], got {utilization}")
    raw_max = math.floor(geometry.bank_elements * utilization / n_prime)
    if raw_max < unroll:
        raise CacheTooSmallError(
            f"a {geometry.capacity_bytes} B {geometry.ways}-way cache holds at most {raw_max} "
            f"elements per column, fewer than one unrolled step of {unroll}"
        )
    return raw_max - raw_max % unroll


def default_config() -> BlockingConfig:
    """Parameters tuned for a 16 KB 2-way L1 and 512 KB L2."""
    return BlockingConfig()


# Share of L2 the default 100 x 100 x 336 block occupies on a 512 KB L2
# (mk + kn + mn = 77200 of 131072 floats). Host scaling keeps this share.
_L2_BUDGET_NUM = 100 * 336 * 2 + 100 * 100
_L2_BUDGET_DEN = PIII_L2_BYTES // 4


def _l2_square_block(l2_elements: int, k: int, multiple: int) -> int:
    budget = l2_elements * _L2_BUDGET_NUM // _L2_BUDGET_DEN
    # largest s with s*s + 2*k*s <= budget
    s = math.isqrt(k * k + budget) - k
    while s * s + 2 * k * s > budget:
        s -= 1
    return s - s % multiple


def host_config(
    l1: CacheGeometry,
    l2_capacity_bytes: int = PIII_L2_BYTES,
    *,
    n_prime: int = 5,
    unroll: int = 16,
    utilization: float = 0.83,
) -> BlockingConfig:
    """Default blocking re-derived for another cache hierarchy.

    ``l1_k`` comes from :func:`derive_l1_k`, ``l2_k`` follows it, and the
    square L2 block edge is the largest multiple of ``n_prime`` whose
    ``mk + kn + mn`` footprint uses the same share of L2 as the defaults do
    on a 512 KB cache.
    """
    l1_k = derive_l1_k(l1, n_prime, utilization, unroll)
    l2_elements = l2_capacity_bytes // l1.element_bytes
    edge = _l2_square_block(l2_elements, l1_k, n_prime)
    if edge < n_prime:
        raise CacheTooSmallError(f"a {l2_capacity_bytes} B L2 cannot hold a {n_prime}-column block")
    return replace(
        default_config(),
        l2_m=edge,
        l2_n=edge,
        l2_k=l1_k,
        l1_n=n_prime,
        l1_k=l1_k,
        unroll=unroll,
        utilization=utilization,
    )


_INT_KEYS = ("l1_capacity_bytes", "l1_ways", "l2_capacity_bytes", "n_prime", "unroll")
_FLOAT_KEYS = ("utilization",)


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[host]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for key, raw in parser["host"].items():
        try:
            if key in _INT_KEYS:
                values[key] = int(raw)
            elif key in _FLOAT_KEYS:
                values[key] = float(raw)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return values


def config_from_text(text: str) -> BlockingConfig:
    values = parse_config_text(text)
    l1 = CacheGeometry(
        values.get("l1_capacity_bytes", PIII_L1.capacity_bytes),
        ways=values.get("l1_ways", PIII_L1.ways),
    )
    return host_config(
        l1,
        values.get("l2_capacity_bytes", PIII_L2_BYTES),
        n_prime=values.get("n_prime", 5),
        unroll=values.get("unroll", 16),
        utilization=values.get("utilization", 0.83),
    )


def load_config(path) -> BlockingConfig:
    return config_from_text(Path(path).read_text())
