import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pslset.correlation import SequenceSet


def random_set(L, M, seed=0):
    rng = np.random.default_rng(seed)
    return SequenceSet(2 * np.pi * rng.random((L, M)))


@st.composite
def sequence_sets(draw, max_L=3, min_M=2, max_M=24):
    L = draw(st.integers(1, max_L))
    M = draw(st.integers(min_M, max_M))
    phases = draw(arrays(np.float64, (L, M),
                         elements=st.floats(-np.pi, np.pi, allow_nan=False)))
    return SequenceSet(phases)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
