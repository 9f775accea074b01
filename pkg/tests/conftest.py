"""Shared hypothesis strategies and the acceptance summary hook."""
from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from polarber.symparam import SymParamList, canonicalize


@st.composite
def exact_lists(draw, min_size: int = 1, max_size: int = 8, max_den: int = 40, signed: bool = True):
    """Random exact lists with masses summing to one."""
    size = draw(st.integers(min_size, max_size))
    weights = draw(st.lists(st.integers(1, 30), min_size=size, max_size=size))
    total = sum(weights)
    entries = []
    for w in weights:
        den = draw(st.integers(1, max_den))
        num = draw(st.integers(-den if signed else 0, den))
        entries.append((Fraction(w, total), Fraction(num, den)))
    return SymParamList(tuple(entries))


@st.composite
def canonical_lists(draw, min_size: int = 1, max_size: int = 8, max_den: int = 40):
    P = draw(exact_lists(min_size=min_size, max_size=max_size, max_den=max_den))
    return canonicalize(P)


_ACCEPTANCE: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    label = item.get_closest_marker("acceptance")
    if label is None:
        return
    name = label.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{verdict}  {name}")
