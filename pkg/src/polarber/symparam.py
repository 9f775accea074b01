"""Symmetric parametrization lists and the canonicalizing operators.

A :class:`SymParamList` holds pairs ``(mu, theta)`` describing a joint
distribution of a bit ``U`` and an observation ``V``: ``mu`` is the
probability of the observation symbol and ``theta = P(0|v) - P(1|v)``.
"""
from __future__ import annotations

import csv
import io
import json
import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .scalar import EXACT, FLOAT, backend_of, check_backend, convert, format_scalar, parse_scalar

DEFAULT_FLOAT_EPS = 1e-12
FLOAT_MASS_TOL = 1e-12


class ResourceLimitError(RuntimeError):
    """Raised when a list would grow beyond the configured size cap."""


@dataclass(frozen=True)
class SymParamList:
    """Immutable list of ``(mu, theta)`` pairs.

    Parameters
    ----------
    entries : tuple of (mu, theta)
        All values from one backend (``Fraction`` or ``float``).
    canonical : bool
        Set by :func:`canonicalize`; promises positive masses, nonnegative
        and strictly increasing ``theta``.
    """

    entries: tuple = ()
    canonical: bool = False

    def __post_init__(self):
        backends = {backend_of(v) for pair in self.entries for v in pair}
        if len(backends) > 1:
            raise TypeError("entries mix exact and float values")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence], backend: str = EXACT, canonical: bool = False):
        """Build a list, converting every value to ``backend``.

        Strings are parsed as ``"num/den"`` or decimal literals.
        """
        check_backend(backend)
        entries = tuple(
            (parse_scalar(mu, backend), parse_scalar(theta, backend)) for mu, theta in pairs
        )
        return cls(entries, canonical)

    @property
    def backend(self) -> str:
        if not self.entries:
            return EXACT
        return backend_of(self.entries[0][0])

    @property
    def mus(self) -> list:
        return [mu for mu, _ in self.entries]

    @property
    def thetas(self) -> list:
        return [theta for _, theta in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator:
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def multiset(self) -> Counter:
        """Entries as a multiset, for order-insensitive comparison."""
        return Counter(self.entries)

    def to_backend(self, backend: str) -> "SymParamList":
        return SymParamList(
            tuple((convert(mu, backend), convert(t, backend)) for mu, t in self.entries),
            self.canonical,
        )


def abs_op(P: SymParamList) -> SymParamList:
    """Replace every ``theta`` by its absolute value."""
    return SymParamList(tuple((mu, abs(t)) for mu, t in P.entries))


def _close(a: float, b: float, eps: float) -> bool:
    return abs(a - b) <= eps * max(abs(a), abs(b))


def sigma_op(P: SymParamList, eps: float = DEFAULT_FLOAT_EPS) -> SymParamList:
    """Drop zero masses and merge entries sharing the same ``theta``.

    Groups keep the position of their first member. In the float backend,
    values whose relative difference is at most ``eps`` are merged into
    their mass-weighted mean.
    """
    live = [(mu, t) for mu, t in P.entries if mu != 0]
    if P.backend == EXACT or not live:
        groups: dict = {}
        for mu, t in live:
            groups[t] = groups.get(t, 0) + mu
        return SymParamList(tuple((Fraction(mu), t) for t, mu in groups.items()))

    # float: cluster near-equal thetas by scanning them in sorted order
    order = sorted(range(len(live)), key=lambda i: (live[i][1], i))
    label = [0] * len(live)
    cluster = 0
    for a, b in zip(order, order[1:]):
        if not _close(live[a][1], live[b][1], eps):
            cluster += 1
        label[b] = cluster
    label[order[0]] = 0
    mass: dict = {}
    moment: dict = {}
    first: dict = {}
    for i, (mu, t) in enumerate(live):
        c = label[i]
        first.setdefault(c, i)
        mass[c] = mass.get(c, 0.0) + mu
        moment[c] = moment.get(c, 0.0) + mu * t
    ordered = sorted(first, key=first.get)
    return SymParamList(tuple((mass[c], moment[c] / mass[c]) for c in ordered))


def canonicalize(P: SymParamList, eps: float = DEFAULT_FLOAT_EPS) -> SymParamList:
    """Return the canonical list: absolute values, merged, sorted ascending in theta.

    The sort is stable, so transient float ties keep their original order.
    """
    merged = sigma_op(abs_op(P), eps)
    entries = sorted(merged.entries, key=lambda e: e[1])
    return SymParamList(tuple(entries), canonical=True)


def is_canonical(P: SymParamList) -> bool:
    """Check the canonical-form conditions directly (ignores the flag)."""
    prev = None
    for mu, t in P.entries:
        if mu <= 0 or t < 0:
            return False
        if prev is not None and t <= prev:
            return False
        prev = t
    return True


@dataclass
class Diagnostics:
    """Result of :func:`validate`; ``ok`` is true when no problem was found."""

    mass_defect: object = 0
    negative_mass: list = field(default_factory=list)
    theta_out_of_range: list = field(default_factory=list)
    ordering_violations: list = field(default_factory=list)
    messages: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.messages


def validate(P: SymParamList) -> Diagnostics:
    """Report mass-sum defect, out-of-range values and ordering violations."""
    d = Diagnostics()
    total = sum(P.mus) if P.entries else 0
    d.mass_defect = 1 - total
    tol = 0 if P.backend == EXACT else FLOAT_MASS_TOL
    if abs(d.mass_defect) > tol:
        d.messages.append(f"mass-sum defect {d.mass_defect}")
    for i, (mu, t) in enumerate(P.entries):
        if mu < 0 or mu > 1:
            d.negative_mass.append(i)
            d.messages.append(f"entry {i}: mass {mu} outside [0, 1]")
        if t < -1 or t > 1:
            d.theta_out_of_range.append(i)
            d.messages.append(f"entry {i}: theta {t} out of range")
    if P.canonical:
        for i, (mu, t) in enumerate(P.entries):
            if mu <= 0:
                d.ordering_violations.append(i)
                d.messages.append(f"entry {i}: canonical list has nonpositive mass")
            if t < 0:
                d.ordering_violations.append(i)
                d.messages.append(f"entry {i}: canonical list has negative theta")
            if i and t <= P.entries[i - 1][1]:
                d.ordering_violations.append(i)
                d.messages.append(f"entry {i}: theta not strictly increasing")
    return d


def require_valid(P: SymParamList) -> None:
    d = validate(P)
    if not d.ok:
        raise ValueError("invalid list: " + "; ".join(d.messages))


# ---------------------------------------------------------------- file formats

def list_to_json(P: SymParamList) -> str:
    entries = [{"mu": format_scalar(mu), "theta": format_scalar(t)} for mu, t in P.entries]
    return json.dumps({"entries": entries}, indent=1)


def list_from_json(text: str, backend: str = EXACT) -> SymParamList:
    obj = json.loads(text)
    try:
        rows = obj["entries"]
        pairs = [(r["mu"], r["theta"]) for r in rows]
    except (KeyError, TypeError) as exc:
        raise ValueError("list JSON must look like {'entries': [{'mu': ..., 'theta': ...}]}") from exc
    return SymParamList.from_pairs([(str(m), str(t)) for m, t in pairs], backend)


def list_to_csv(P: SymParamList) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mu", "theta"])
    for mu, t in P.entries:
        w.writerow([format_scalar(mu), format_scalar(t)])
    return buf.getvalue()


def list_from_csv(text: str, backend: str = EXACT) -> SymParamList:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["mu", "theta"]:
        raise ValueError("list CSV must have header 'mu,theta'")
    pairs = [(row["mu"].strip(), row["theta"].strip()) for row in reader]
    return SymParamList.from_pairs(pairs, backend)


def read_list(path: str, backend: str = EXACT) -> SymParamList:
    """Load a list from a ``.json`` or ``.csv`` file."""
    with open(path) as fh:
        text = fh.read()
    if os.path.splitext(path)[1].lower() == ".csv":
        return list_from_csv(text, backend)
    return list_from_json(text, backend)


def write_list(P: SymParamList, path: str) -> None:
    text = list_to_csv(P) if os.path.splitext(path)[1].lower() == ".csv" else list_to_json(P) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


__all__ = [
    "SymParamList",
    "ResourceLimitError",
    "Diagnostics",
    "abs_op",
    "sigma_op",
    "canonicalize",
    "is_canonical",
    "validate",
    "require_valid",
    "list_to_json",
    "list_from_json",
    "list_to_csv",
    "list_from_csv",
    "read_list",
    "write_list",
    "EXACT",
    "FLOAT",
]
