"""Long reproduction runs shared by several test modules (computed once per session)."""
from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path

from polarber.construct import analyze_all
from polarber.symparam import SymParamList

DATA = Path(__file__).parent / "data"
BASE = SymParamList.from_pairs([(1, "0.78")])


@lru_cache(maxsize=None)
def exact_n8():
    return tuple(analyze_all(BASE, 8, "exact"))


@lru_cache(maxsize=None)
def interval_n8(Q: int):
    return tuple(analyze_all(BASE, 8, "interval", Q=Q))


@lru_cache(maxsize=None)
def interval_n10():
    return tuple(analyze_all(BASE, 10, "interval", Q=512))


def reference_n8() -> dict:
    rows = json.loads((DATA / "table_n8_exact.json").read_text())
    return {r["index_bits"]: r["upper"] for r in rows}


def reference_n10() -> dict:
    rows = json.loads((DATA / "table_n10_interval.json").read_text())
    return {r["index_bits"]: (r["lower"], r["upper"]) for r in rows}
