"""Polar minus/plus transforms on :class:`SymParamList` values.

Words are strings over ``'-'`` and ``'+'``; the leftmost operator is
applied first. Index bits map ``0 -> '-'`` and ``1 -> '+'``.
"""
from __future__ import annotations

from .scalar import EXACT
from .symparam import ResourceLimitError, SymParamList, canonicalize

DEFAULT_SIZE_CAP = 4_000_000

_OP_ALIASES = {"-": "-", "+": "+", "−": "-", "0": "-", "1": "+"}


def parse_word(w) -> str:
    """Normalize an operator word.

    Accepts strings over ``-``/``+`` (the Unicode minus sign too), bit
    strings over ``0``/``1``, or a sequence of bits.
    """
    if isinstance(w, str):
        try:
            return "".join(_OP_ALIASES[c] for c in w)
        except KeyError as exc:
            raise ValueError(f"invalid operator word {w!r}") from exc
    return "".join("+" if int(b) else "-" for b in w)


def word_from_bits(bits) -> str:
    """Map an index ``b1...bn`` (string or sequence) to its operator word."""
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValueError(f"invalid index bits {bits!r}")
        return bits.replace("0", "-").replace("1", "+")
    return parse_word(bits)


def bits_from_word(w: str) -> str:
    return parse_word(w).replace("-", "0").replace("+", "1")


def index_bits(i: int, n: int) -> str:
    """Index ``i`` as an ``n``-bit string with ``b1`` the most significant bit."""
    return format(i, f"0{n}b") if n else ""


def _check_cap(size: int, cap: int | None) -> None:
    if cap is not None and size > cap:
        raise ResourceLimitError(f"list of {size} entries exceeds the size cap {cap}")


def minus(P: SymParamList, cap: int | None = DEFAULT_SIZE_CAP) -> SymParamList:
    """Minus transform: ``{(mu0*mu1, theta0*theta1)}`` over ordered pairs."""
    _check_cap(len(P) ** 2, cap)
    E = P.entries
    return SymParamList(tuple((m0 * m1, t0 * t1) for m0, t0 in E for m1, t1 in E))


def plus(P: SymParamList, cap: int | None = DEFAULT_SIZE_CAP) -> SymParamList:
    """Plus transform over ordered pairs and both values of the decided bit.

    For a pair ``(v0, v1)`` and decided bit ``u`` the entry is
    ``(mu0*mu1*(1 -/+ t0*t1)/2, (t1 -/+ t0)/(1 -/+ t0*t1))`` with ``+`` for
    ``u = 0``; a vanishing denominator yields ``(0, 0)``.
    """
    _check_cap(2 * len(P) ** 2, cap)
    zero = 0 if P.backend == EXACT else 0.0
    two = 2 if P.backend == EXACT else 2.0
    out = []
    for m0, t0 in P.entries:
        for m1, t1 in P.entries:
            p = t0 * t1
            m = m0 * m1
            for s in (1, -1):
                den = 1 + s * p
                if den == 0:
                    out.append((zero * m, zero * m))
                else:
                    out.append((m * den / two, (t1 + s * t0) / den))
    return SymParamList(tuple(out))


def apply_op(P: SymParamList, op: str, cap: int | None = DEFAULT_SIZE_CAP) -> SymParamList:
    if op == "-":
        return minus(P, cap)
    if op == "+":
        return plus(P, cap)
    raise ValueError(f"unknown operator {op!r}")


def apply_word(
    P: SymParamList,
    w,
    canonicalize_each: bool = True,
    cap: int | None = DEFAULT_SIZE_CAP,
) -> SymParamList:
    """Apply the operators of ``w`` left to right.

    Parameters
    ----------
    P : SymParamList
    w : str or sequence of bits
    canonicalize_each : bool
        Canonicalize the input and every intermediate list (default). Raw
        chaining is exponential in the word length and is meant for
        cross-checks only.
    cap : int or None
        Maximum list size; :class:`ResourceLimitError` when exceeded.
    """
    word = parse_word(w)
    cur = canonicalize(P) if canonicalize_each else P
    for op in word:
        cur = apply_op(cur, op, cap)
        if canonicalize_each:
            cur = canonicalize(cur)
    return cur


def theta_max_after(theta0, w):
    """Largest theta after applying ``w`` to the single-entry list ``{(1, theta0)}``.

    Uses ``t-(x) = x**2`` and ``t+(x) = 2x / (1 + x**2)``.
    """
    if theta0 < 0 or theta0 > 1:
        raise ValueError("theta0 must lie in [0, 1]")
    x = theta0
    for op in parse_word(w):
        x = x * x if op == "-" else 2 * x / (1 + x * x)
    return x
