"""Numeric backends and decimal rendering.

Two backends are supported behind the same set of helpers:

* ``"exact"``: :class:`fractions.Fraction`, always in lowest terms.
* ``"float"``: binary64 :class:`float`, for fast ranking and prototyping.

Values are plain Python numbers; the backend of a value is inferred from
its type. Integers are accepted wherever an exact value is expected.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)

Scalar = Union[Fraction, float]

_DECIMAL_RE = re.compile(
    r"^\s*([+-]?)(\d+(?:\.\d*)?|\.\d+)(?:[eE]([+-]?\d+))?\s*$"
)
_ROUND_MODES = ("round_up", "truncate", "nearest")


def backend_of(x) -> str:
    """Return the backend name of a scalar value."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (Fraction, int)):
        return EXACT
    if isinstance(x, float):
        return FLOAT
    raise TypeError(f"unsupported scalar type {type(x).__name__}")


def check_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return backend


def from_decimal_string(s: str, backend: str = EXACT) -> Scalar:
    """Parse a finite decimal literal.

    Parameters
    ----------
    s : str
        Optional sign, digits, optional fraction, optional exponent.
    backend : {"exact", "float"}

    Returns
    -------
    Fraction or float
        The exact rational equal to the literal (exact backend), or the
        nearest binary64 value.

    Examples
    --------
    >>> from_decimal_string("0.11")
    Fraction(11, 100)
    """
    check_backend(backend)
    m = _DECIMAL_RE.match(s)
    if m is None:
        raise ValueError(f"malformed decimal literal: {s!r}")
    sign, body, exp = m.groups()
    if "." in body:
        whole, frac = body.split(".")
    else:
        whole, frac = body, ""
    num = int((whole or "0") + frac)
    e = (int(exp) if exp else 0) - len(frac)
    value = Fraction(num * 10**e) if e >= 0 else Fraction(num, 10**-e)
    if sign == "-":
        value = -value
    return value if backend == EXACT else float(value)


def parse_scalar(s, backend: str = EXACT) -> Scalar:
    """Parse ``"num/den"``, a decimal literal, or a number already in memory."""
    check_backend(backend)
    if isinstance(s, str):
        if "/" in s:
            num, den = s.split("/", 1)
            value = Fraction(int(num.strip()), int(den.strip()))
        else:
            value = from_decimal_string(s, EXACT)
        return value if backend == EXACT else float(value)
    return convert(s, backend)


def convert(x, backend: str) -> Scalar:
    """Convert a number to the requested backend.

    Floats convert to their exact binary value in the exact backend.
    """
    check_backend(backend)
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if backend == EXACT:
        return Fraction(x)
    return float(x)


def format_scalar(x) -> str:
    """Serialize a scalar: ``"num/den"`` for rationals, ``repr`` for floats."""
    if backend_of(x) == EXACT:
        x = Fraction(x)
        return f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def compare(a, b) -> int:
    """Three-way comparison returning -1, 0 or 1.

    Raises
    ------
    TypeError
        If the operands belong to different backends.
    """
    if backend_of(a) != backend_of(b):
        raise TypeError("cannot compare scalars from different backends")
    return (a > b) - (a < b)


def _floor_log10(q: Fraction) -> int:
    # exact floor(log10(q)) for q > 0
    num, den = q.numerator, q.denominator
    e = len(str(num)) - len(str(den))
    # 10^e <= q < 10^(e+1) after at most one correction step either way
    while True:
        if e >= 0:
            lo_ok = num >= den * 10**e
            hi_ok = num < den * 10 ** (e + 1)
        else:
            lo_ok = num * 10**-e >= den
            hi_ok = num * 10 ** (-e - 1) < den
        if not lo_ok:
            e -= 1
        elif not hi_ok:
            e += 1
        else:
            return e


def to_decimal(x, sig_digits: int, mode: str = "nearest") -> str:
    """Render a scalar with exactly ``sig_digits`` significant digits.

    Parameters
    ----------
    x : Fraction, int or float
        Value to render. Floats are rendered from their exact binary value.
    sig_digits : int
        Number of significant digits, at least 1.
    mode : {"round_up", "truncate", "nearest"}
        ``round_up`` rounds the magnitude away from zero, ``truncate``
        toward zero, ``nearest`` to the closest representable value with
        ties away from zero.

    Returns
    -------
    str
        Scientific notation such as ``"3.334e-1"``; zero renders as ``"0"``.
    """
    if sig_digits < 1:
        raise ValueError("sig_digits must be at least 1")
    if mode not in _ROUND_MODES:
        raise ValueError(f"unknown rounding mode {mode!r}")
    q = Fraction(x)
    if q == 0:
        return "0"
    sign = "-" if q < 0 else ""
    q = abs(q)
    e = _floor_log10(q)
    shift = sig_digits - 1 - e
    scaled = q * 10**shift if shift >= 0 else q / 10**-shift
    digits, rem = divmod(scaled.numerator, scaled.denominator)
    if rem:
        if mode == "round_up":
            digits += 1
        elif mode == "nearest" and 2 * rem >= scaled.denominator:
            digits += 1
    if digits == 10**sig_digits:
        digits //= 10
        e += 1
    text = str(digits)
    mantissa = text[0] + ("." + text[1:] if sig_digits > 1 else "")
    return f"{sign}{mantissa}e{e}"


def to_decimal_directed(x, sig_digits: int, toward: str) -> str:
    """Render a signed value rounded toward ``+inf`` (``"up"``) or ``-inf`` (``"down"``)."""
    if toward not in ("up", "down"):
        raise ValueError("toward must be 'up' or 'down'")
    negative = Fraction(x) < 0
    away = (toward == "up") != negative
    return to_decimal(x, sig_digits, "round_up" if away else "truncate")
