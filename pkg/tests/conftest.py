import numpy as np
import pytest
from hypothesis import strategies as st

import hodgefir as hf


@pytest.fixture(scope="session")
def toy():
    return hf.toy_complex()


@pytest.fixture(scope="session")
def toy_lap(toy):
    return hf.laplacians(hf.incidence(toy))


@pytest.fixture(scope="session")
def toy_spec(toy_lap):
    return hf.eigendecompose(toy_lap)


@pytest.fixture(scope="session")
def sioux():
    return hf.sioux_falls()


@pytest.fixture(scope="session")
def sioux_lap(sioux):
    return hf.laplacians(hf.incidence(sioux))


@pytest.fixture(scope="session")
def sioux_spec(sioux_lap):
    return hf.eigendecompose(sioux_lap)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dense(m):
    return m.toarray() if hasattr(m, "toarray") else np.asarray(m)


@st.composite
def complexes(draw, max_nodes=12):
    n = draw(st.integers(2, max_nodes))
    p = draw(st.floats(0.2, 0.9))
    q = draw(st.floats(0.0, 1.0))
    seed = draw(st.integers(0, 2**31 - 1))
    return hf.random_complex(n, p, q, seed)


# acceptance lines collected by tests/test_acceptance.py, printed after the run
ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    def _record(number: int, ok: bool, detail: str) -> bool:
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
