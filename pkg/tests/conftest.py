import os
import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ppszkit.cnf import CnfFormula

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def formulas(draw, max_n=6, max_m=10, max_width=3, min_n=1):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(0, max_m))
    clauses = []
    for _ in range(m):
        w = draw(st.integers(1, min(max_width, n)))
        vs = draw(st.lists(st.integers(1, n), min_size=w, max_size=w, unique=True))
        signs = draw(st.lists(st.booleans(), min_size=w, max_size=w))
        clauses.append([v if sg else -v for v, sg in zip(vs, signs)])
    return CnfFormula.from_clauses(clauses, range(1, n + 1))


def random_formula(rng: random.Random, n: int, m: int, width: int = 3) -> CnfFormula:
    clauses = []
    for _ in range(m):
        w = rng.randint(1, min(width, n))
        vs = rng.sample(range(1, n + 1), w)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return CnfFormula.from_clauses(clauses, range(1, n + 1))


# ---------------------------------------------------------------------------
# acceptance summary: tests/test_acceptance.py registers one line per criterion

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance_record():
    def record(num: int, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES[num] = f"criterion {num}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[num])
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for num in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[num])
