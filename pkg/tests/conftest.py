import fnmatch
import time

import numpy as np
import pytest

from monosens import load_fixture

# Exponent matrices as printed for the two educational trees, upper/lower halves.
A11 = """
1010010000
1010001100
1010001010
1010001001
1001000100
1001000010
1001000001
1000100100
1000100010
1000100001
"""
A12 = """
0110010000
0110001100
0110001010
0110001001
0101000100
0101000010
0101000001
0100100100
0100100010
0100100001
"""
A21 = """
1010010
1020001
1011001
1010101
1011000
1002000
1001100
1010100
1001100
1000200
"""
A22 = """
0110010
0120001
0111001
0110101
0111000
0102000
0101100
0110100
0101100
0100200
"""


def _rows(text):
    return np.array([[int(c) for c in line] for line in text.split()], dtype=np.int64)


PRINTED_A_ML = np.vstack([_rows(A11), _rows(A12)])
PRINTED_A_NML = np.vstack([_rows(A21), _rows(A22)])

EDU_EVENTS = {
    "not_admitted": ["*/F1/FR"],
    "fail_second": ["*/F2"],
    "distinction_both": ["*/D1/D2"],
    "distinction_first": ["*/D1/*"],
    "distinction_second": ["*/D2"],
}


def select(model, patterns):
    return [y for y, lab in enumerate(model.labels)
            if any(fnmatch.fnmatchcase(lab, p) for p in patterns)]


@pytest.fixture(scope="session")
def coin():
    return load_fixture("coin")


@pytest.fixture(scope="session")
def edu_ml():
    return load_fixture("edu_ml")


@pytest.fixture(scope="session")
def edu_nml():
    return load_fixture("edu_nml")


@pytest.fixture(scope="session")
def ex3():
    return load_fixture("ex3")


@pytest.fixture(scope="session")
def edu_events():
    def get(model, name):
        return select(model, EDU_EVENTS[name])
    return get


# -- acceptance reporting -------------------------------------------------------

_RESULTS = []


class Criterion:
    """Label, time budget and notes for one acceptance criterion."""

    def __init__(self):
        self.start = time.perf_counter()
        self.label, self.limit, self.notes = None, None, []

    def __call__(self, label, limit_s):
        self.label, self.limit = label, limit_s

    def note(self, text):
        self.notes.append(text)

    @property
    def elapsed(self):
        return time.perf_counter() - self.start

    def check_time(self):
        assert self.elapsed < self.limit, f"took {self.elapsed:.2f} s, budget {self.limit} s"


@pytest.fixture
def criterion(request):
    """Time a criterion and record a pass/fail line for the terminal summary."""
    crit = Criterion()
    yield crit
    report = getattr(request.node, "rep_call", None)
    ok = report is not None and report.passed
    _RESULTS.append((crit.label or request.node.name, ok, crit.elapsed, crit.limit, crit.notes))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, elapsed, limit, notes in _RESULTS:
        bound = f" (limit {limit:g} s)" if limit else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  [{elapsed:.2f} s{bound}]")
        for text in notes:
            terminalreporter.write_line(f"      {text}")
