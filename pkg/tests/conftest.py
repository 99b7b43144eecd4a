import numpy as np
import pytest

from blockgemm.pack import PackedPanel, aligned_zeros

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bits(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float32).view(np.uint32)


def random_panel(rng, k_padded, width=5, n_cols=5) -> PackedPanel:
    buf = aligned_zeros(k_padded * width)
    buf[:] = rng.uniform(-1, 1, size=buf.size)
    return PackedPanel(buf, k_padded, n_cols, range(k_padded), range(n_cols))
