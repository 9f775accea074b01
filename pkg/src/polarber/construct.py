"""Per-index bit error probabilities, frozen-set selection and block bounds.

Exact mode follows every index down the prefix tree with exact lattice
lists; the last two levels are evaluated without materializing the leaf
lists. Interval mode keeps a degraded and an upgraded grid list per node,
both quantized to ``Q`` entries before every transform, and reports
``[ber_lower, ber_upper]`` from the upgraded and degraded lists.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .lattice import GridList, LatticeList
from .metric import error_prob, m_plus_canonical, m_value
from .scalar import EXACT, format_scalar, parse_scalar, to_decimal_directed
from .symparam import ResourceLimitError, SymParamList, canonicalize, require_valid
from .transform import DEFAULT_SIZE_CAP, apply_op, index_bits, word_from_bits

EXACT_MODE = "exact"
INTERVAL_MODE = "interval"
DEFAULT_Q = 512
DEFAULT_GRID_BITS = 1024
PAPER_DIGITS = 4


def grid_bits_for(Q: int) -> int:
    """Default grid resolution of interval mode.

    Snapping moves at most ``2**-K`` of mass per entry, so the rounding
    floor of an interval scales like ``Q * 2**-K``. Sixteen extra bits per
    doubling of ``Q`` keep that floor falling far faster than the merge
    loss, so a larger ``Q`` never loses precision to rounding.
    """
    return DEFAULT_GRID_BITS + 16 * max(0, (Q - 1).bit_length())


@dataclass(frozen=True)
class IndexRecord:
    """Bit error probability bounds of one index ``b1...bn``."""

    index: str
    m_lower: object
    m_upper: object
    ber_lower: object
    ber_upper: object
    mode: str = EXACT_MODE

    @classmethod
    def exact(cls, index: str, m) -> "IndexRecord":
        ber = error_prob(m)
        return cls(index, m, m, ber, ber, EXACT_MODE)

    @classmethod
    def interval(cls, index: str, m_lower, m_upper) -> "IndexRecord":
        return cls(index, m_lower, m_upper, error_prob(m_upper), error_prob(m_lower), INTERVAL_MODE)

    @property
    def value(self) -> int:
        return int(self.index, 2) if self.index else 0

    @property
    def word(self) -> str:
        return word_from_bits(self.index)


@dataclass(frozen=True)
class CodeSpec:
    """Partition of the indices into decided (``I0``) and frozen (``I1``) sets."""

    n: int
    I0: tuple
    I1: tuple
    I0_reversed: tuple = ()
    I1_reversed: tuple = ()
    block_lower: object = 0
    block_upper: object = 0

    def frozen_mask(self):
        """Boolean list over index values, true on ``I1``."""
        mask = [False] * (1 << self.n)
        for b in self.I1:
            mask[int(b, 2) if b else 0] = True
        return mask


# ------------------------------------------------------------------ analysis

def _children_parallel(tasks: list, worker: Callable, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks))


def _split_depth(n_levels: int, threads: int) -> int:
    if threads <= 1:
        return 0
    d = 0
    while (1 << d) < 4 * threads and d < n_levels:
        d += 1
    return d


def _exact_lattice(base: SymParamList, n: int, threads: int, backend, progress) -> dict:
    root = LatticeList.from_symparam(base)
    out: dict = {}

    def leaves(L: LatticeList, prefix: str) -> dict:
        res = {}
        if n - len(prefix) == 1:
            m = L.m_value()
            res[prefix + "0"] = m * m
            res[prefix + "1"] = L.m_plus()
            return res
        m = L.m_value()
        mp = L.m_plus()
        res[prefix + "00"] = (m * m) ** 2
        res[prefix + "10"] = mp * mp
        res[prefix + "01"] = L.m_after_then_plus("-", backend)
        res[prefix + "11"] = L.m_after_then_plus("+", backend)
        if progress:
            progress(prefix, len(L))
        return res

    def visit(L: LatticeList, prefix: str) -> dict:
        if len(prefix) >= max(n - 2, 0):
            return leaves(L, prefix)
        res = {}
        for bit, op in (("0", "-"), ("1", "+")):
            res.update(visit(L.step(op, backend), prefix + bit))
        return res

    # expand a frontier for concurrent workers, then recurse depth-first
    split = min(_split_depth(n, threads), max(n - 2, 0))
    frontier = [(root, "")]
    for _ in range(split):
        frontier = [(L.step(op, backend), p + bit) for L, p in frontier for bit, op in (("0", "-"), ("1", "+"))]
    for part in _children_parallel(frontier, lambda task: visit(*task), threads):
        out.update(part)
    return out


def _exact_float(base: SymParamList, n: int, cap) -> dict:
    out: dict = {}

    def visit(P: SymParamList, prefix: str):
        if len(prefix) == n - 1:
            m = m_value(P)
            out[prefix + "0"] = m * m
            out[prefix + "1"] = m_plus_canonical(P)
            return
        for bit, op in (("0", "-"), ("1", "+")):
            visit(canonicalize(apply_op(P, op, cap)), prefix + bit)

    visit(canonicalize(base), "")
    return out


def _interval(base: SymParamList, n: int, Q: int, K: int, threads: int, backend, progress) -> dict:
    roots = tuple(GridList.snap(base, K, down).quantize(down, Q, True, backend) for down in (True, False))

    def visit(lists, prefix: str) -> dict:
        if len(prefix) == n - 1:
            lo, hi = lists
            m_lo, m_hi = lo.m_value(), hi.m_value()
            if progress:
                progress(prefix, max(len(lo), len(hi)))
            return {
                prefix + "0": (m_lo * m_lo, m_hi * m_hi),
                prefix + "1": (lo.m_plus(), hi.m_plus()),
            }
        res = {}
        for bit, op in (("0", "-"), ("1", "+")):
            child = tuple(L.step(op, down, Q, True, backend) for L, down in zip(lists, (True, False)))
            res.update(visit(child, prefix + bit))
        return res

    split = min(_split_depth(n, threads), n - 1)
    frontier = [(roots, "")]
    for _ in range(split):
        frontier = [
            (tuple(L.step(op, down, Q, True, backend) for L, down in zip(lists, (True, False))), p + bit)
            for lists, p in frontier
            for bit, op in (("0", "-"), ("1", "+"))
        ]
    out: dict = {}
    for part in _children_parallel(frontier, lambda task: visit(*task), threads):
        out.update(part)
    return out


def analyze_all(
    base: SymParamList,
    n: int,
    mode: str = EXACT_MODE,
    Q: int = DEFAULT_Q,
    *,
    grid_bits: int | None = None,
    threads: int = 1,
    backend: str | None = None,
    cap: int | None = DEFAULT_SIZE_CAP,
    progress: Callable | None = None,
) -> list:
    """Bit error probability of every index of a length-``2**n`` code.

    Parameters
    ----------
    base : SymParamList
        Per-symbol list of the source/channel.
    n : int
        Number of levels, at least 1.
    mode : {"exact", "interval"}
        Exact values, or sound intervals from degraded/upgraded lists.
    Q : int
        Quantization target of interval mode (at least 2).
    grid_bits : int or None
        Resolution ``K`` of the dyadic grid in interval mode; default
        :func:`grid_bits_for` of ``Q``.
    threads : int
        Worker threads for independent subtrees; results do not depend on it.
    backend : {"compiled", "python"} or None
        Kernel backend; default is the active one.
    cap : int or None
        Size cap of the float exact path.
    progress : callable or None
        Called as ``progress(prefix, list_size)`` at the last expanded nodes.

    Returns
    -------
    list of IndexRecord
        One record per index, in index order.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    require_valid(base)
    if mode == EXACT_MODE:
        if base.backend == EXACT:
            values = _exact_lattice(base, n, threads, backend, progress)
        else:
            values = _exact_float(base, n, cap)
        return [IndexRecord.exact(index_bits(i, n), values[index_bits(i, n)]) for i in range(1 << n)]
    if mode == INTERVAL_MODE:
        if base.backend != EXACT:
            raise TypeError("interval mode needs an exact base list")
        if Q < 2:
            raise ValueError("interval mode needs Q >= 2")
        values = _interval(base, n, Q, grid_bits or grid_bits_for(Q), threads, backend, progress)
        return [IndexRecord.interval(index_bits(i, n), *values[index_bits(i, n)]) for i in range(1 << n)]
    raise ValueError(f"unknown mode {mode!r}")


# ----------------------------------------------------------------- selection

def bit_reverse(bits: str) -> str:
    return bits[::-1]


def bit_reverse_sets(spec: CodeSpec) -> CodeSpec:
    """Fill in the bit-reversed images of ``I0`` and ``I1``."""
    key = lambda b: int(b, 2) if b else 0  # noqa: E731
    return replace(
        spec,
        I0_reversed=tuple(sorted((bit_reverse(b) for b in spec.I0), key=key)),
        I1_reversed=tuple(sorted((bit_reverse(b) for b in spec.I1), key=key)),
    )


def block_error_bounds(records: Sequence[IndexRecord], I0: Iterable[str]):
    """Block error bounds ``(max ber_lower, min(1, sum ber_upper))`` over ``I0``."""
    chosen = set(I0)
    rows = [r for r in records if r.index in chosen]
    missing = chosen - {r.index for r in rows}
    if missing:
        raise ValueError(f"indices not in records: {sorted(missing)[:5]}")
    if not rows:
        return Fraction(0), Fraction(0)
    lower = max(r.ber_lower for r in rows)
    upper = sum(r.ber_upper for r in rows)
    return lower, min(upper, 1)


def _threshold_hit(m, n: int, beta: float) -> bool:
    # m >= 1 - 2**(-2**(n*beta))
    if m >= 1:
        return True
    gap = 1 - Fraction(m)
    log2_gap = math.log2(gap.numerator) - math.log2(gap.denominator)
    return log2_gap <= -(2.0 ** (n * beta))


def select_frozen(records: Sequence[IndexRecord], k: int | None = None, beta: float | None = None) -> CodeSpec:
    """Choose the decided set ``I0`` and return the full :class:`CodeSpec`.

    Parameters
    ----------
    records : sequence of IndexRecord
        All ``2**n`` records of one analysis.
    k : int, optional
        Put the ``k`` indices with the largest ``m_lower`` into ``I0``;
        ties go to the smaller index.
    beta : float, optional
        Put every index with ``m_lower >= 1 - 2**(-2**(n * beta))`` into ``I0``.
    """
    if (k is None) == (beta is None):
        raise ValueError("give exactly one of k and beta")
    records = sorted(records, key=lambda r: r.value)
    N = len(records)
    n = len(records[0].index) if records else 0
    if N != 1 << n:
        raise ValueError("records must cover every index of one code")
    if k is not None:
        if not 0 <= k <= N:
            raise ValueError(f"k must lie in [0, {N}]")
        ranked = sorted(records, key=lambda r: (-r.m_lower, r.value))
        chosen = {r.index for r in ranked[:k]}
    else:
        chosen = {r.index for r in records if _threshold_hit(r.m_lower, n, beta)}
    I0 = tuple(r.index for r in records if r.index in chosen)
    I1 = tuple(r.index for r in records if r.index not in chosen)
    lower, upper = block_error_bounds(records, I0)
    return bit_reverse_sets(CodeSpec(n, I0, I1, block_lower=lower, block_upper=upper))


# ----------------------------------------------------------------- rendering

def paper_value(ber, toward: str, digits: int = PAPER_DIGITS) -> str:
    """Signed display of a bit error probability.

    Values above 1/4 are shown as ``-gamma`` with ``gamma = 1/2 - ber``;
    the signed value is rounded toward ``+inf`` (``"up"``) or ``-inf``
    (``"down"``) at ``digits`` significant digits.
    """
    ber = Fraction(ber)
    if ber > Fraction(1, 4):
        gamma = Fraction(1, 2) - ber
        if gamma == 0:
            return "-0"
        return to_decimal_directed(-gamma, digits, toward)
    return to_decimal_directed(ber, digits, toward)


def parse_ber_cell(text: str):
    """Inverse of the CSV cell formats: exact, decimal or signed display."""
    text = text.strip()
    if text.startswith("-"):
        return Fraction(1, 2) + parse_scalar(text)
    return parse_scalar(text)


CSV_COLUMNS = ["index_bits", "ber_lower", "ber_upper", "m_lower", "m_upper"]


def records_to_csv(records: Sequence[IndexRecord], paper_style: bool = False) -> str:
    """Serialize records; exact ``num/den`` cells unless ``paper_style``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(records, key=lambda r: r.value):
        if paper_style:
            row = [
                r.index,
                paper_value(r.ber_lower, "down"),
                paper_value(r.ber_upper, "up"),
                to_decimal_directed(r.m_lower, PAPER_DIGITS, "down"),
                to_decimal_directed(r.m_upper, PAPER_DIGITS, "up"),
            ]
        else:
            row = [r.index] + [format_scalar(v) for v in (r.ber_lower, r.ber_upper, r.m_lower, r.m_upper)]
        w.writerow(row)
    return buf.getvalue()


def records_from_csv(text: str) -> list:
    """Read records written by :func:`records_to_csv` (either style)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != CSV_COLUMNS:
        raise ValueError(f"construct CSV must have columns {','.join(CSV_COLUMNS)}")
    out = []
    for row in reader:
        ber_lo = parse_ber_cell(row["ber_lower"])
        ber_hi = parse_ber_cell(row["ber_upper"])
        m_lo = parse_scalar(row["m_lower"].strip())
        m_hi = parse_scalar(row["m_upper"].strip())
        mode = EXACT_MODE if (ber_lo == ber_hi and m_lo == m_hi) else INTERVAL_MODE
        out.append(IndexRecord(row["index_bits"].strip(), m_lo, m_hi, ber_lo, ber_hi, mode))
    return out


def codespec_to_dict(spec: CodeSpec) -> dict:
    return {
        "n": spec.n,
        "I0": list(spec.I0),
        "I1": list(spec.I1),
        "I0_reversed": list(spec.I0_reversed),
        "I1_reversed": list(spec.I1_reversed),
        "block_lower": format_scalar(spec.block_lower),
        "block_upper": format_scalar(spec.block_upper),
    }


def codespec_from_dict(obj: dict) -> CodeSpec:
    spec = CodeSpec(
        n=int(obj["n"]),
        I0=tuple(obj["I0"]),
        I1=tuple(obj["I1"]),
        block_lower=parse_scalar(str(obj.get("block_lower", "0"))),
        block_upper=parse_scalar(str(obj.get("block_upper", "0"))),
    )
    spec = bit_reverse_sets(spec)
    if set(spec.I0) & set(spec.I1) or len(spec.I0) + len(spec.I1) != 1 << spec.n:
        raise ValueError("I0 and I1 must partition all indices")
    return spec


__all__ = [
    "IndexRecord",
    "CodeSpec",
    "analyze_all",
    "select_frozen",
    "bit_reverse_sets",
    "block_error_bounds",
    "paper_value",
    "records_to_csv",
    "records_from_csv",
    "codespec_to_dict",
    "codespec_from_dict",
    "ResourceLimitError",
]
