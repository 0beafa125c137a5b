import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from fnls.fourier import FourierState

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


def random_state(rng: np.random.Generator, n_max: int, scale: float = 1.0, decay: float = 0.0) -> FourierState:
    """Complex Gaussian coefficients times ``scale * <n>^{-decay}``."""
    n = np.arange(-n_max, n_max + 1)
    w = scale * (1.0 + n * n) ** (-decay / 2)
    z = rng.standard_normal(2 * n_max + 1) + 1j * rng.standard_normal(2 * n_max + 1)
    return FourierState(n_max, w * z / np.sqrt(2))


@st.composite
def states(draw, max_n=8, max_abs=2.0):
    N = draw(st.integers(0, max_n))
    real = st.floats(-max_abs, max_abs, allow_nan=False, allow_infinity=False)
    re = draw(st.lists(real, min_size=2 * N + 1, max_size=2 * N + 1))
    im = draw(st.lists(real, min_size=2 * N + 1, max_size=2 * N + 1))
    return FourierState(N, np.array(re) + 1j * np.array(im))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``record(k, passed, detail)``."""

    def record(k: int, passed: bool, detail: str) -> bool:
        line = f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[k] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
