from __future__ import annotations

import functools
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from lpisa.code_model import QcSpec, TannerCode, build_qc_code, load_builtin  # noqa: E402

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# 12-bit (3,3)-regular QC code; instantons of size <= 4: eight of size 1, one of size 4
TINY_QC = QcSpec(3, 3, 4, ((2, 0, 3), (1, 2, 1), (0, 3, 2)))
# 12-bit (3,4)-regular QC code whose size-3 instantons include zero-cost ties
TIE_QC = QcSpec(3, 4, 3, ((0, 0, 0, 0), (0, 1, 2, 0), (0, 2, 1, 1)))

# codes small enough for exhaustive vertex enumeration; hamming7 has 80 fractional vertices
SMALL_H = {
    "hamming7": np.array([[1, 1, 1, 0, 1, 0, 0],
                          [1, 1, 0, 1, 0, 1, 0],
                          [1, 0, 1, 1, 0, 0, 1]]),
    "ring8": np.array([[1, 1, 1, 0, 0, 0, 0, 0],
                       [0, 0, 1, 1, 1, 0, 0, 0],
                       [0, 0, 0, 0, 1, 1, 1, 0],
                       [1, 0, 0, 0, 0, 0, 1, 1],
                       [0, 1, 0, 1, 0, 1, 0, 1]]),
    "cycle6": np.array([[1, 1, 1, 0, 0, 0],
                        [0, 0, 1, 1, 1, 0],
                        [1, 0, 0, 0, 1, 1],
                        [0, 1, 0, 1, 0, 1]]),
}


@functools.lru_cache(maxsize=None)
def _tanner() -> TannerCode:
    return load_builtin("tanner155")


@pytest.fixture(scope="session")
def tanner() -> TannerCode:
    return _tanner()


@pytest.fixture(scope="session")
def tiny_qc() -> TannerCode:
    return build_qc_code(TINY_QC)


@pytest.fixture(scope="session")
def tie_qc() -> TannerCode:
    return build_qc_code(TIE_QC)


@functools.lru_cache(maxsize=None)
def small_vertices(name: str):
    from oracles import polytope_vertices

    return polytope_vertices(SMALL_H[name])


# pass/fail lines from the acceptance suite, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
