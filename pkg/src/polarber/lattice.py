"""Exact integer-lattice and dyadic-grid representations of canonical lists.

:class:`LatticeList` stores a canonical list over a common denominator as
integer pairs ``(A, B) = D * (P(0, v), P(1, v))`` with ``A >= B``. The
plus/minus transforms only multiply and add these integers, so the exact
pipeline never builds a rational number until the final M-value.

:class:`GridList` stores a list on the dyadic grid ``2**-K`` and is used
by the outward-rounded interval pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from . import kernels
from .symparam import SymParamList, canonicalize


@dataclass(frozen=True)
class LatticeList:
    """Canonical list as integer pairs over denominator ``den``."""

    A: tuple
    B: tuple
    den: int

    @classmethod
    def from_symparam(cls, P: SymParamList) -> "LatticeList":
        if P.backend != "exact":
            raise TypeError("the lattice needs an exact list")
        Pc = canonicalize(P)
        halves = [(mu * (1 + t) / 2, mu * (1 - t) / 2) for mu, t in Pc.entries]
        den = 1
        for a, b in halves:
            den = lcm(den, Fraction(a).denominator, Fraction(b).denominator)
        A = tuple(int(a * den) for a, _ in halves)
        B = tuple(int(b * den) for _, b in halves)
        return cls(A, B, den)

    def to_symparam(self) -> SymParamList:
        entries = tuple(
            (Fraction(a + b, self.den), Fraction(a - b, a + b)) for a, b in zip(self.A, self.B)
        )
        return SymParamList(entries, canonical=True)

    def __len__(self) -> int:
        return len(self.A)

    def step(self, op: str, backend: str | None = None) -> "LatticeList":
        """Canonical child list after ``op``."""
        A, B = kernels.get(backend).lattice_step(list(self.A), list(self.B), op)
        return LatticeList(tuple(A), tuple(B), self.den * self.den)

    def m_value(self) -> Fraction:
        return Fraction(sum(self.A) - sum(self.B), self.den)

    def m_plus(self) -> Fraction:
        """M-value after a plus transform, in one pass."""
        tau = 0
        acc = 0
        for a, b in zip(self.A, self.B):
            mass = a + b
            tau += mass
            acc += (a - b) * tau
            tau += mass
        return Fraction(acc, self.den * self.den)

    def m_after_then_plus(self, op: str, backend: str | None = None) -> Fraction:
        """M-value after ``op`` followed by ``+``, streaming the child list."""
        num = kernels.get(backend).lattice_leaf_plus(list(self.A), list(self.B), op)
        d2 = self.den * self.den
        return Fraction(num, d2 * d2)


@dataclass(frozen=True)
class GridList:
    """Canonical list on the grid ``2**-K``: ``mu = m / 2**K``, ``theta = t / 2**K``."""

    m: tuple
    t: tuple
    K: int

    @classmethod
    def snap(cls, P: SymParamList, K: int, down: bool) -> "GridList":
        """Outward snap of an exact list.

        Masses are floored and the remainder is placed at theta = 0
        (``down``) or theta = 1; thetas are floored (``down``) or ceiled.
        Both moves degrade (respectively upgrade) the list.
        """
        if P.backend != "exact":
            raise TypeError("grid snapping needs an exact list")
        Pc = canonicalize(P)
        T = 1 << K
        acc: dict = {}
        total = 0
        for mu, th in Pc.entries:
            mass = (mu.numerator * T) // mu.denominator
            num = th.numerator * T
            t = num // th.denominator if down else -((-num) // th.denominator)
            if mass:
                acc[t] = acc.get(t, 0) + mass
                total += mass
        if total < T:
            bucket = 0 if down else T
            acc[bucket] = acc.get(bucket, 0) + (T - total)
        keys = sorted(acc)
        return cls(tuple(acc[k] for k in keys), tuple(keys), K)

    def __len__(self) -> int:
        return len(self.m)

    def to_symparam(self) -> SymParamList:
        T = 1 << self.K
        return SymParamList(
            tuple((Fraction(m, T), Fraction(t, T)) for m, t in zip(self.m, self.t)), canonical=True
        )

    def quantize(self, down: bool, Q: int, pin: bool = True, backend: str | None = None) -> "GridList":
        m, t = kernels.get(backend).grid_quantize(list(self.m), list(self.t), self.K, down, Q, pin)
        return GridList(tuple(m), tuple(t), self.K)

    def step(self, op: str, down: bool, Q: int, pin: bool = True, backend: str | None = None) -> "GridList":
        """Transform, snap outward, canonicalize and quantize to ``Q``."""
        m, t = kernels.get(backend).grid_step(list(self.m), list(self.t), self.K, op, down, Q, pin)
        return GridList(tuple(m), tuple(t), self.K)

    def m_value(self) -> Fraction:
        return Fraction(sum(a * b for a, b in zip(self.m, self.t)), 1 << (2 * self.K))

    def m_plus(self) -> Fraction:
        tau = 0
        acc = 0
        for m, t in zip(self.m, self.t):
            tau += m
            acc += m * t * tau
            tau += m
        return Fraction(acc, 1 << (3 * self.K))
