"""Greedy degrading and upgrading merges with M-based losses.

Both quantizers keep the M-value of the list unchanged and move the
M-value after a plus transform monotonically: down for :func:`degrade`,
up for :func:`upgrade`. The loss of one merge is the exact change of that
post-plus M-value.

Two search strategies produce the identical merge sequence (ties go to
the smallest position):

* ``"scan"``: rescan every candidate after each merge, O(C^2).
* ``"heap"``: lazy-deletion heap over a doubly linked list, O(C log C).
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

from .scalar import EXACT
from .symparam import SymParamList, is_canonical

DEGRADE = "degrade"
UPGRADE = "upgrade"
DIRECTIONS = (DEGRADE, UPGRADE)
METHODS = ("heap", "scan")


@dataclass(frozen=True)
class QuantizeConfig:
    """Target size, direction and the theta = 1 pinning switch."""

    target_size: int
    direction: str = DEGRADE
    pin_theta_one: bool = False

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        minimum = 2 if self.direction == UPGRADE else 1
        if self.target_size < minimum:
            raise ValueError(f"{self.direction} needs target_size >= {minimum}")


@dataclass(frozen=True)
class QuantizeCertificate:
    """Precision certificate of one quantization call.

    Attributes
    ----------
    delta_bound
        ``theta_c / Q**2`` (degrade) or ``theta_c / (Q - 1)**2`` (upgrade).
    theta_c
        Largest theta of the list the merges acted on.
    actual_merge_loss_sum
        Total change of the post-plus M-value.
    merge_losses
        Loss of every merge, in order.
    """

    delta_bound: object
    theta_c: object
    actual_merge_loss_sum: object
    merge_losses: tuple = ()

    @property
    def holds(self) -> bool:
        return self.actual_merge_loss_sum <= self.delta_bound


def loss_bound(theta_c, Q: int, direction: str):
    """Bound on the cumulative post-plus M change of a quantization to ``Q`` entries."""
    if direction == DEGRADE:
        if Q < 1:
            raise ValueError("Q must be positive")
        return theta_c / Fraction(Q * Q) if not isinstance(theta_c, float) else theta_c / (Q * Q)
    if direction == UPGRADE:
        if Q < 2:
            raise ValueError("upgrade needs Q >= 2")
        d = (Q - 1) ** 2
        return theta_c / Fraction(d) if not isinstance(theta_c, float) else theta_c / d
    raise ValueError(f"direction must be one of {DIRECTIONS}")


def degrade_loss(mu0, t0, mu1, t1):
    """Post-plus M decrease of merging two adjacent entries."""
    return mu0 * mu1 * (t1 - t0)


def upgrade_loss(t_prev, mu, t, t_next):
    """Post-plus M increase of splitting ``(mu, t)`` onto its neighbours.

    Equals ``mu**2 / (1/(t - t_prev) + 1/(t_next - t))``, written without
    the reciprocals.
    """
    a = t - t_prev
    b = t_next - t
    return mu * mu * a * b / (a + b)


def split_mass(mu, t_prev, t, t_next):
    """Mean-preserving split of ``mu`` onto the neighbouring thetas.

    Returns ``(to_prev, to_next)`` with ``to_prev * t_prev + to_next * t_next
    == mu * t``.
    """
    gap = t_next - t_prev
    to_prev = mu * (t_next - t) / gap
    return to_prev, mu - to_prev


def _zero(P: SymParamList):
    return Fraction(0) if P.backend == EXACT else 0.0


def _prepare(Pc: SymParamList, pin_theta_one: bool):
    if not is_canonical(Pc):
        raise ValueError("quantizers need a canonical list")
    work = [list(e) for e in Pc.entries]
    pinned = None
    if pin_theta_one and work and work[-1][1] == 1:
        pinned = tuple(work.pop())
    return work, pinned


def _finish(Pc, work, pinned, losses, Q, direction):
    entries = [tuple(e) for e in work]
    theta_c = Pc.entries[-1][1] if Pc.entries else _zero(Pc)
    if pinned is not None:
        theta_c = work[-1][1] if work else _zero(Pc)
        entries.append(pinned)
    total = sum(losses, _zero(Pc))
    cert = QuantizeCertificate(
        delta_bound=loss_bound(theta_c, Q, direction),
        theta_c=theta_c,
        actual_merge_loss_sum=total,
        merge_losses=tuple(losses),
    )
    return SymParamList(tuple(entries), canonical=True), cert


# ------------------------------------------------------------------- degrade

def _degrade_scan(work, Q, losses):
    while len(work) > Q:
        best = None
        j_best = 0
        for j in range(len(work) - 1):
            loss = degrade_loss(work[j][0], work[j][1], work[j + 1][0], work[j + 1][1])
            if best is None or loss < best:
                best, j_best = loss, j
        (m0, t0), (m1, t1) = work[j_best], work[j_best + 1]
        m = m0 + m1
        work[j_best] = [m, (m0 * t0 + m1 * t1) / m]
        del work[j_best + 1]
        losses.append(best)
    return work


def _degrade_heap(work, Q, losses):
    C = len(work)
    if C <= Q:
        return work
    mu = [e[0] for e in work]
    th = [e[1] for e in work]
    nxt = list(range(1, C)) + [-1]
    prv = [-1] + list(range(C - 1))
    alive = [True] * C
    version = [0] * C
    heap = [(degrade_loss(mu[j], th[j], mu[j + 1], th[j + 1]), j, 0) for j in range(C - 1)]
    heapq.heapify(heap)
    size = C
    while size > Q:
        loss, j, ver = heapq.heappop(heap)
        if not alive[j] or ver != version[j] or nxt[j] < 0:
            continue
        k = nxt[j]
        m = mu[j] + mu[k]
        th[j] = (mu[j] * th[j] + mu[k] * th[k]) / m
        mu[j] = m
        alive[k] = False
        nxt[j] = nxt[k]
        if nxt[k] >= 0:
            prv[nxt[k]] = j
        size -= 1
        losses.append(loss)
        version[j] += 1
        if nxt[j] >= 0:
            q = nxt[j]
            heapq.heappush(heap, (degrade_loss(mu[j], th[j], mu[q], th[q]), j, version[j]))
        p = prv[j]
        if p >= 0:
            version[p] += 1
            heapq.heappush(heap, (degrade_loss(mu[p], th[p], mu[j], th[j]), p, version[p]))
    out = []
    j = 0
    while j >= 0:
        out.append([mu[j], th[j]])
        j = nxt[j]
    return out


def degrade(Pc: SymParamList, Q: int, pin_theta_one: bool = False, method: str = "heap"):
    """Greedy degrading merge down to at most ``Q`` entries.

    Parameters
    ----------
    Pc : SymParamList
        Canonical input list.
    Q : int
        Target size, at least 1.
    pin_theta_one : bool
        Set aside an entry with theta = 1 and restore it afterwards, so
        the output may hold ``Q + 1`` entries.
    method : {"heap", "scan"}

    Returns
    -------
    (SymParamList, QuantizeCertificate)
    """
    QuantizeConfig(Q, DEGRADE, pin_theta_one)
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    work, pinned = _prepare(Pc, pin_theta_one)
    losses: list = []
    work = (_degrade_heap if method == "heap" else _degrade_scan)(work, Q, losses)
    return _finish(Pc, work, pinned, losses, Q, DEGRADE)


# ------------------------------------------------------------------- upgrade

def _upgrade_scan(work, Q, losses):
    while len(work) > Q:
        best = None
        j_best = 1
        for j in range(1, len(work) - 1):
            loss = upgrade_loss(work[j - 1][1], work[j][0], work[j][1], work[j + 1][1])
            if best is None or loss < best:
                best, j_best = loss, j
        m, t = work[j_best]
        to_prev, to_next = split_mass(m, work[j_best - 1][1], t, work[j_best + 1][1])
        work[j_best - 1][0] += to_prev
        work[j_best + 1][0] += to_next
        del work[j_best]
        losses.append(best)
    return work


def _upgrade_heap(work, Q, losses):
    C = len(work)
    if C <= Q:
        return work
    mu = [e[0] for e in work]
    th = [e[1] for e in work]
    nxt = list(range(1, C)) + [-1]
    prv = [-1] + list(range(C - 1))
    alive = [True] * C
    version = [0] * C

    def key(v):
        return upgrade_loss(th[prv[v]], mu[v], th[v], th[nxt[v]])

    heap = [(key(v), v, 0) for v in range(1, C - 1)]
    heapq.heapify(heap)
    size = C
    while size > Q:
        loss, v, ver = heapq.heappop(heap)
        if not alive[v] or ver != version[v]:
            continue
        p, q = prv[v], nxt[v]
        to_prev, to_next = split_mass(mu[v], th[p], th[v], th[q])
        mu[p] += to_prev
        mu[q] += to_next
        alive[v] = False
        nxt[p], prv[q] = q, p
        size -= 1
        losses.append(loss)
        for w in (p, q):
            version[w] += 1
            if prv[w] >= 0 and nxt[w] >= 0:
                heapq.heappush(heap, (key(w), w, version[w]))
    out = []
    j = 0
    while j >= 0:
        out.append([mu[j], th[j]])
        j = nxt[j]
    return out


def upgrade(Pc: SymParamList, Q: int, pin_theta_one: bool = False, method: str = "heap"):
    """Greedy upgrading merge down to at most ``Q`` entries.

    The interior entry with the smallest loss is removed and its mass is
    split onto its two neighbours so that the M-value is unchanged. The
    first and last entries are never removed.

    Parameters
    ----------
    Pc : SymParamList
        Canonical input list.
    Q : int
        Target size, at least 2.
    pin_theta_one : bool
        Set aside an entry with theta = 1 and restore it afterwards.
    method : {"heap", "scan"}

    Returns
    -------
    (SymParamList, QuantizeCertificate)
    """
    QuantizeConfig(Q, UPGRADE, pin_theta_one)
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    work, pinned = _prepare(Pc, pin_theta_one)
    losses: list = []
    work = (_upgrade_heap if method == "heap" else _upgrade_scan)(work, Q, losses)
    return _finish(Pc, work, pinned, losses, Q, UPGRADE)


def quantize(Pc: SymParamList, config: QuantizeConfig, method: str = "heap"):
    """Dispatch on ``config.direction``."""
    fn = degrade if config.direction == DEGRADE else upgrade
    return fn(Pc, config.target_size, config.pin_theta_one, method)
