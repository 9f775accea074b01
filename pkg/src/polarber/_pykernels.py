"""Pure-Python reference implementations of the hot kernels.

The compiled extension ``_ccore`` exposes the same functions with the same
results; this module is selected when the extension is unavailable.

Exact lattice
    A canonical list over a common denominator ``D`` is stored as integer
    pairs ``(A, B) = (D * mu * (1 + theta) / 2, D * mu * (1 - theta) / 2)``
    with ``A >= B >= 0``, ordered by ascending theta (descending ``B / A``).
    Children live over ``D**2``.

Dyadic grid
    A list is stored as integers ``(m, t)`` meaning ``mu = m / 2**K`` and
    ``theta = t / 2**K``. Every child is snapped outward (theta down and
    the mass remainder at theta = 0 for a degraded list; theta up and the
    remainder at theta = 1 for an upgraded list) before the greedy merge.
"""
from __future__ import annotations

import heapq
from fractions import Fraction
from functools import cmp_to_key

import numpy as np

NAME = "python"

_MINUS, _PLUS = "-", "+"
# child kinds: 0 minus pair, 1 plus u=0, 2 plus u=1 with i<j, 3 plus u=1 with i=j
_CLUSTER_TOL = 1e-10


def _check_op(op: str) -> str:
    if op not in (_MINUS, _PLUS):
        raise ValueError(f"unknown operator {op!r}")
    return op


# ------------------------------------------------------------------ lattice

def _ratio_keys(A, B):
    """Long-double approximations of B/A, accurate to about 1e-15 relative."""
    keys = np.empty(len(A), dtype=np.longdouble)
    for idx, (a, b) in enumerate(zip(A, B)):
        if b == 0:
            keys[idx] = 0
            continue
        e = b.bit_length() - a.bit_length()
        q = (b << (64 - e)) // a if e <= 64 else (b >> (e - 64)) // a
        keys[idx] = np.ldexp(np.longdouble(float(q)), e - 64)
    return keys


def _child_keys(keys, op):
    """Keys and (i, j, kind) codes of all children of a canonical lattice list."""
    p = len(keys)
    I, J = np.triu_indices(p)
    ri, rj = keys[I], keys[J]
    if op == _MINUS:
        ck = (ri + rj) / (1 + ri * rj)
        kind = np.zeros(len(I), dtype=np.int8)
        return ck, I, J, kind
    k0 = ri * rj
    off = I < J
    Io, Jo = I[off], J[off]
    with np.errstate(divide="ignore", invalid="ignore"):
        k2 = keys[Jo] / keys[Io]
    # B_i = 0 forces B_j = 0; those children vanish
    live2 = keys[Io] > 0
    Io, Jo, k2 = Io[live2], Jo[live2], k2[live2]
    diag = np.arange(p)
    live3 = keys > 0
    diag = diag[live3]
    ck = np.concatenate([k0, k2, np.ones(len(diag), dtype=np.longdouble)])
    II = np.concatenate([I, Io, diag])
    JJ = np.concatenate([J, Jo, diag])
    kind = np.concatenate(
        [np.full(len(I), 1, np.int8), np.full(len(Io), 2, np.int8), np.full(len(diag), 3, np.int8)]
    )
    return ck, II, JJ, kind


def _child_value(A, B, i, j, kind):
    ai, bi, aj, bj = A[i], B[i], A[j], B[j]
    if kind == 0:
        ca, cb = ai * aj + bi * bj, ai * bj + bi * aj
    elif kind == 1:
        ca, cb = ai * aj, bi * bj
    elif kind == 2:
        ca, cb = bi * aj, ai * bj
    else:
        v = ai * bi
        return v, v
    if i != j:
        ca <<= 1
        cb <<= 1
    return ca, cb


def _sorted_children(A, B, op):
    """Yield exact child values ``(A, B)`` in ascending theta order."""
    if len(A) == 0:
        return
    keys = _ratio_keys(A, B)
    ck, I, J, kind = _child_keys(keys, op)
    order = np.lexsort((np.arange(len(ck)), -ck))
    ck = ck[order]
    I = I[order].tolist()
    J = J[order].tolist()
    kind = kind[order].tolist()
    # split into clusters whose keys are too close to trust
    gaps = ck[:-1] - ck[1:]
    breaks = np.nonzero(gaps > _CLUSTER_TOL * ck[:-1])[0] + 1
    bounds = [0] + breaks.tolist() + [len(ck)]
    cmp = cmp_to_key(lambda x, y: (x[1] * y[0] > y[1] * x[0]) - (x[1] * y[0] < y[1] * x[0]))
    for s, e in zip(bounds, bounds[1:]):
        if e - s == 1:
            yield _child_value(A, B, I[s], J[s], kind[s])
            continue
        vals = [_child_value(A, B, I[k], J[k], kind[k]) for k in range(s, e)]
        # descending B/A: x before y when B_x A_y > B_y A_x
        vals.sort(key=cmp, reverse=True)
        yield from vals


def lattice_step(A, B, op):
    """Canonical child list of a canonical lattice list.

    Parameters
    ----------
    A, B : list of int
    op : {"-", "+"}

    Returns
    -------
    (list of int, list of int)
        Child list over the squared denominator, canonical order.
    """
    _check_op(op)
    outA: list = []
    outB: list = []
    for ca, cb in _sorted_children(A, B, op):
        if ca == 0:
            continue
        if outA and outB[-1] * ca == cb * outA[-1]:
            outA[-1] += ca
            outB[-1] += cb
        else:
            outA.append(ca)
            outB.append(cb)
    return outA, outB


def lattice_leaf_plus(A, B, op):
    """Numerator of the M-value after ``op`` then ``+``.

    The child list is streamed in ascending theta order and never stored.
    The result is over ``(D**2)**2`` where ``D`` is the input denominator.
    """
    _check_op(op)
    tau = 0
    acc = 0
    for ca, cb in _sorted_children(A, B, op):
        mass = ca + cb
        tau += mass
        acc += (ca - cb) * tau
        tau += mass
    return acc


# --------------------------------------------------------------------- grid

def _grid_children(m, t, K, op, down):
    T = 1 << K
    K2, K3 = 2 * K, 3 * K + 1
    T2 = 1 << K2
    acc: dict = {}
    total = 0
    n = len(m)
    for i in range(n):
        mi, ti = m[i], t[i]
        for j in range(i, n):
            w = mi * m[j]
            if j > i:
                w <<= 1
            p = ti * t[j]
            if op == _MINUS:
                mass = w >> K
                th = p >> K if down else -((-p) >> K)
                if mass:
                    acc[th] = acc.get(th, 0) + mass
                    total += mass
                continue
            # u = 0
            den = T2 + p
            mass = (w * den) >> K3
            if mass:
                num = (ti + t[j]) << K2
                th = num // den if down else -((-num) // den)
                acc[th] = acc.get(th, 0) + mass
                total += mass
            # u = 1
            den = T2 - p
            if den == 0:
                continue
            mass = (w * den) >> K3
            if mass:
                num = abs(t[j] - ti) << K2
                th = num // den if down else -((-num) // den)
                acc[th] = acc.get(th, 0) + mass
                total += mass
    rem = T - total
    if rem:
        bucket = 0 if down else T
        acc[bucket] = acc.get(bucket, 0) + rem
    keys = sorted(acc)
    return [acc[k] for k in keys], keys


def _grid_degrade(m, t, Q):
    C = len(m)
    if C <= Q:
        return m, t
    nxt = list(range(1, C)) + [-1]
    prv = [-1] + list(range(C - 1))
    alive = [True] * C
    version = [0] * C
    heap = [(m[j] * m[j + 1] * (t[j + 1] - t[j]), j, 0) for j in range(C - 1)]
    heapq.heapify(heap)
    size = C
    while size > Q:
        _, j, ver = heapq.heappop(heap)
        if not alive[j] or ver != version[j] or nxt[j] < 0:
            continue
        k = nxt[j]
        mass = m[j] + m[k]
        t[j] = (m[j] * t[j] + m[k] * t[k]) // mass
        m[j] = mass
        alive[k] = False
        nxt[j] = nxt[k]
        if nxt[k] >= 0:
            prv[nxt[k]] = j
        size -= 1
        version[j] += 1
        q = nxt[j]
        if q >= 0:
            heapq.heappush(heap, (m[j] * m[q] * (t[q] - t[j]), j, version[j]))
        p = prv[j]
        if p >= 0:
            version[p] += 1
            heapq.heappush(heap, (m[p] * m[j] * (t[j] - t[p]), p, version[p]))
    return _collect(m, t, nxt)


def _grid_upgrade(m, t, Q, K):
    C = len(m)
    if C <= Q:
        return m, t
    S = 2 * K + 1
    nxt = list(range(1, C)) + [-1]
    prv = [-1] + list(range(C - 1))
    alive = [True] * C
    version = [0] * C

    def key(v):
        a = t[v] - t[prv[v]]
        b = t[nxt[v]] - t[v]
        return ((m[v] * m[v] * a * b) << S) // (a + b)

    heap = [(key(v), v, 0) for v in range(1, C - 1)]
    heapq.heapify(heap)
    size = C
    while size > Q:
        _, v, ver = heapq.heappop(heap)
        if not alive[v] or ver != version[v]:
            continue
        p, q = prv[v], nxt[v]
        to_prev = m[v] * (t[q] - t[v]) // (t[q] - t[p])
        m[p] += to_prev
        m[q] += m[v] - to_prev
        alive[v] = False
        nxt[p], prv[q] = q, p
        size -= 1
        for w in (p, q):
            version[w] += 1
            if prv[w] >= 0 and nxt[w] >= 0:
                heapq.heappush(heap, (key(w), w, version[w]))
    return _collect(m, t, nxt)


def _collect(m, t, nxt):
    om, ot = [], []
    j = 0
    while j >= 0:
        om.append(m[j])
        ot.append(t[j])
        j = nxt[j]
    return om, ot


def grid_quantize(m, t, K, down, Q, pin):
    """Greedy merge on a canonical grid list (degrade if ``down``)."""
    m, t = list(m), list(t)
    pinned = None
    if pin and t and t[-1] == 1 << K:
        pinned = (m.pop(), t.pop())
    if down:
        m, t = _grid_degrade(m, t, Q)
    else:
        m, t = _grid_upgrade(m, t, Q, K)
    if pinned is not None:
        m.append(pinned[0])
        t.append(pinned[1])
    return m, t


def grid_step(m, t, K, op, down, Q, pin=True):
    """Transform, snap outward to the grid, canonicalize and quantize.

    Parameters
    ----------
    m, t : list of int
        Canonical grid list.
    K : int
        Grid resolution in bits.
    op : {"-", "+"}
    down : bool
        True for the degraded list, False for the upgraded one.
    Q : int
        Quantization target.
    pin : bool
        Keep a theta = 1 entry out of the merge.
    """
    _check_op(op)
    cm, ct = _grid_children(m, t, K, op, down)
    return grid_quantize(cm, ct, K, down, Q, pin)


# ------------------------------------------------------------------ decoder

def sc_decode_batch(theta, frozen_mask, frozen_vals, truth, genie):
    """Successive-cancellation decoding of a batch of blocks.

    Parameters
    ----------
    theta : ndarray, shape (trials, N)
        Per-position posteriors in decoder order.
    frozen_mask : ndarray of bool, shape (N,)
        Positions copied from ``frozen_vals`` instead of decided.
    frozen_vals : ndarray of uint8, shape (trials, N) or None
    truth : ndarray of uint8, shape (trials, N) or None
        Correct bits; required when ``genie`` is set.
    genie : bool
        Decide every position, count errors against ``truth`` and feed
        ``truth`` forward.

    Returns
    -------
    (ndarray, ndarray)
        Decisions of shape (trials, N) and per-position error counts
        (zeros unless ``genie``).
    """
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    T, N = theta.shape
    u_hat = np.zeros((T, N), dtype=np.uint8)
    errors = np.zeros(N, dtype=np.int64)
    frozen_mask = np.asarray(frozen_mask, dtype=bool)
    if genie and truth is None:
        raise ValueError("genie decoding needs the true bits")
    if frozen_mask.shape != (N,):
        raise ValueError("frozen mask length mismatch")
    if frozen_vals is not None and np.shape(frozen_vals) != (T, N):
        raise ValueError("frozen values shape mismatch")
    if truth is not None and np.shape(truth) != (T, N):
        raise ValueError("truth shape mismatch")

    def rec(th, lo):
        n = th.shape[1]
        if n == 1:
            d = (th[:, 0] < 0).astype(np.uint8)
            if genie:
                errors[lo] += int(np.count_nonzero(d != truth[:, lo]))
                d = truth[:, lo].copy()
            elif frozen_mask[lo]:
                d = frozen_vals[:, lo].copy()
            u_hat[:, lo] = d
            return d[:, None]
        h = n // 2
        a, b = th[:, :h], th[:, h:]
        s = rec(a * b, lo)
        sign = 1.0 - 2.0 * s
        den = 1.0 + sign * a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            plus = np.where(den == 0.0, 0.0, (b + sign * a) / den)
        r = rec(plus, lo + h)
        return np.concatenate([s ^ r, r], axis=1)

    rec(theta, 0)
    return u_hat, errors
