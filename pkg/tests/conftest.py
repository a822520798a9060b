import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_spd(rng, n, cond=10.0):
    """Independent SPD generator for tests (not the library one)."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.exp(rng.uniform(-0.5, 0.5, size=n) * np.log(cond))
    return (Q * lam) @ Q.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@st.composite
def spd_matrices(draw, n=None, max_n=5, max_log_cond=4.0):
    if n is None:
        n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    log_cond = draw(st.floats(0.0, max_log_cond))
    rng = np.random.default_rng(seed)
    scale = np.exp(draw(st.floats(-2.0, 2.0)))
    return scale * random_spd(rng, n, np.exp(log_cond))


@st.composite
def spd_pairs(draw, max_n=5, max_log_cond=4.0):
    n = draw(st.integers(1, max_n))
    return draw(spd_matrices(n=n, max_log_cond=max_log_cond)), draw(
        spd_matrices(n=n, max_log_cond=max_log_cond)
    )


@st.composite
def spd_triples(draw, max_n=5, max_log_cond=3.0):
    n = draw(st.integers(1, max_n))
    return tuple(draw(spd_matrices(n=n, max_log_cond=max_log_cond)) for _ in range(3))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
