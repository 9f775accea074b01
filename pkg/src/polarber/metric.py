"""M-values, bit error probabilities and comparison metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .scalar import EXACT
from .symparam import SymParamList, canonicalize, is_canonical
from .transform import DEFAULT_SIZE_CAP, apply_op, parse_word


def m_value(P: SymParamList):
    """Return ``sum(mu * |theta|)``."""
    if P.backend == EXACT:
        return sum((mu * abs(t) for mu, t in P.entries), Fraction(0))
    return math.fsum(mu * abs(t) for mu, t in P.entries)


def error_prob(m):
    """MAP decision error probability ``(1 - m) / 2``."""
    return (1 - m) / 2


def m_plus_canonical(Pc: SymParamList):
    """M-value after a plus transform, in one pass over a canonical list.

    Evaluates ``sum(mu_v * theta_v * (mu_v + 2 * sum_{v' < v} mu_v'))``.

    Raises
    ------
    ValueError
        If ``Pc`` is not canonical.
    """
    if not is_canonical(Pc):
        raise ValueError("m_plus_canonical needs a canonical list")
    tau = 0
    acc = 0
    for mu, t in Pc.entries:
        tau += mu
        acc += mu * t * tau
        tau += mu
    if Pc.backend == EXACT:
        return Fraction(acc)
    return float(acc)


def m_of_word(P: SymParamList, w, cap: int | None = DEFAULT_SIZE_CAP):
    """M-value of ``P`` after the word ``w`` without building the last list.

    The word prefix is applied with canonicalization after each step; the
    last operator is finished by squaring (``-``) or by
    :func:`m_plus_canonical` (``+``).
    """
    word = parse_word(w)
    if not word:
        raise ValueError("word must be non-empty")
    cur = canonicalize(P)
    for op in word[:-1]:
        cur = canonicalize(apply_op(cur, op, cap))
    if word[-1] == "-":
        m = m_value(cur)
        return m * m
    return m_plus_canonical(cur)


# ------------------------------------------------------------------ comparison

def binary_entropy(p: float) -> float:
    """Binary entropy in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def binary_entropy_inv(h: float, tol: float = 1e-14) -> float:
    """Inverse of the binary entropy restricted to ``[0, 1/2]``, by bisection."""
    if h <= 0.0:
        return 0.0
    if h >= 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MetricReport:
    """M-value and the alternative reliability metrics of one list.

    ``m``, ``error_prob`` and ``h_quad`` are exact for exact lists; the
    entropy and Bhattacharyya values are always floats.
    """

    m: object
    error_prob: object
    h_cond: float
    z: float
    h_quad: object
    z_interval: tuple
    h_interval: tuple

    def in_z_interval(self, tol: float = 1e-12) -> bool:
        lo, hi = self.z_interval
        return lo - tol <= float(self.error_prob) <= hi + tol

    def in_h_interval(self, tol: float = 1e-12) -> bool:
        lo, hi = self.h_interval
        return lo - tol <= float(self.error_prob) <= hi + tol


def comparison_metrics(P: SymParamList) -> MetricReport:
    """Conditional entropy, Bhattacharyya parameter and quadratic entropy.

    Also returns the error-probability sandwiches
    ``[(1 - sqrt(1 - Z**2)) / 2, Z]`` and ``[h^-1(H), H / 2]``.
    """
    m = m_value(P)
    ber = error_prob(m)
    h = math.fsum(float(mu) * binary_entropy((1.0 - abs(float(t))) / 2.0) for mu, t in P.entries)
    z = math.fsum(float(mu) * math.sqrt(max(0.0, 1.0 - float(t) ** 2)) for mu, t in P.entries)
    hq = (1 - sum((mu * t * t for mu, t in P.entries), 0 * m)) / 2
    z_lo = 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - z * z)))
    return MetricReport(
        m=m,
        error_prob=ber,
        h_cond=h,
        z=z,
        h_quad=hq,
        z_interval=(z_lo, z),
        h_interval=(binary_entropy_inv(h), h / 2.0),
    )
