"""Polar transform, encoders, successive-cancellation decoder and Monte Carlo.

Index convention: bit ``b1`` of an index ``b1...bn`` is its most
significant bit and names the first operator applied to the raw channel.
The transform is ``u = x G`` with ``G`` the Kronecker power of
``[[1, 0], [1, 1]]`` combined with the bit-reversal permutation; ``G`` is
its own inverse over GF(2).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .construct import CodeSpec, bit_reverse_sets
from .scalar import format_scalar
from .symparam import SymParamList, canonicalize
from .transform import index_bits

SOURCE = "source"
NONSYSTEMATIC = "channel_nonsystematic"
SYSTEMATIC = "channel_systematic"
GENIE = "genie_per_index"
BLOCK = "block"
CHUNK = 4096


def _levels(N: int) -> int:
    n = N.bit_length() - 1
    if N < 1 or 1 << n != N:
        raise ValueError(f"length {N} is not a power of two")
    return n


def bit_reversal(n: int) -> np.ndarray:
    """Permutation ``p`` with ``p[i]`` the ``n``-bit reversal of ``i``."""
    idx = np.arange(1 << n)
    rev = np.zeros_like(idx)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


def polar_transform(x) -> np.ndarray:
    """Compute ``x G`` over GF(2) along the last axis.

    Works on a single block of shape ``(N,)`` or a batch ``(..., N)``.
    """
    x = np.asarray(x, dtype=np.uint8)
    N = x.shape[-1]
    n = _levels(N)
    v = x[..., bit_reversal(n)].copy()
    h = N // 2
    while h >= 1:
        blocks = v.reshape(v.shape[:-1] + (N // (2 * h), 2, h))
        blocks[..., 0, :] ^= blocks[..., 1, :]
        h //= 2
    return v


def generator_matrix(n: int) -> np.ndarray:
    """Dense ``G`` (row ``i`` is the transform of the ``i``-th unit vector)."""
    return polar_transform(np.eye(1 << n, dtype=np.uint8))


# ------------------------------------------------------------------ channels

@dataclass(frozen=True)
class ChannelModel:
    """Observation model of the decoder.

    ``kind="bsc"`` is a binary symmetric channel with crossover ``epsilon``
    and uniform input. ``kind="side_info"`` draws per symbol an observation
    ``v`` with probability ``mu_v`` and a bit that is 0 with probability
    ``(1 + theta_v) / 2``.
    """

    kind: str
    epsilon: object = None
    base: SymParamList | None = None

    @classmethod
    def bsc(cls, epsilon) -> "ChannelModel":
        eps = Fraction(epsilon) if not isinstance(epsilon, float) else epsilon
        if not 0 <= eps <= Fraction(1, 2):
            raise ValueError("crossover probability must lie in [0, 1/2]")
        return cls("bsc", epsilon=eps)

    @classmethod
    def side_info(cls, base: SymParamList) -> "ChannelModel":
        return cls("side_info", base=base)

    def symbol_list(self) -> SymParamList:
        """Per-symbol list with one entry per observation value."""
        if self.kind == "bsc":
            c = 1 - 2 * self.epsilon
            half = Fraction(1, 2) if not isinstance(c, float) else 0.5
            return SymParamList(((half, c), (half, -c)))
        return self.base

    def base_list(self) -> SymParamList:
        """Canonical base list used for construction."""
        return canonicalize(self.symbol_list())

    def sample(self, rng: np.random.Generator, trials: int, N: int):
        """Draw ``(x, theta)`` blocks of shape ``(trials, N)``."""
        if self.kind == "bsc":
            eps = float(self.epsilon)
            x = rng.integers(0, 2, size=(trials, N), dtype=np.uint8)
            z = (rng.random((trials, N)) < eps).astype(np.uint8)
            y = x ^ z
            theta = (1.0 - 2.0 * eps) * (1.0 - 2.0 * y)
            return x, theta
        mus = np.array([float(m) for m in self.base.mus])
        ths = np.array([float(t) for t in self.base.thetas])
        v = rng.choice(len(mus), size=(trials, N), p=mus / mus.sum())
        th = ths[v]
        x = (rng.random((trials, N)) >= (1.0 + th) / 2.0).astype(np.uint8)
        return x, th


# ------------------------------------------------------------------- decoder

def _index_array(indices, n: int) -> np.ndarray:
    return np.array([int(b, 2) if b else 0 for b in indices], dtype=np.int64)


def sc_decode_theta(theta, spec: CodeSpec, u_frozen=None, backend: str | None = None) -> np.ndarray:
    """SC decoding from per-position posteriors.

    Parameters
    ----------
    theta : array_like, shape (N,) or (trials, N)
        ``P(0|y_i) - P(1|y_i)`` for every position of ``x``.
    spec : CodeSpec
        Frozen positions ``I1`` are copied from ``u_frozen``.
    u_frozen : array_like, optional
        Full-length vector(s) whose ``I1`` entries hold the frozen bits;
        zero when omitted.

    Returns
    -------
    ndarray of uint8
        Decoded ``u`` with the same leading shape as ``theta``.
    """
    th = np.asarray(theta, dtype=np.float64)
    single = th.ndim == 1
    th = np.atleast_2d(th)
    N = th.shape[1]
    n = _levels(N)
    if n != spec.n:
        raise ValueError("observation length does not match the code")
    mask = np.array(spec.frozen_mask(), dtype=bool)
    fv = None
    if u_frozen is not None:
        fv = np.atleast_2d(np.asarray(u_frozen, dtype=np.uint8))
        fv = np.broadcast_to(fv, th.shape).copy()
    u, _ = kernels.get(backend).sc_decode_batch(th[:, bit_reversal(n)], mask, fv, None, False)
    u = np.asarray(u)
    return u[0] if single else u


def sc_decode(u_frozen, y, base: SymParamList, spec: CodeSpec, backend: str | None = None) -> np.ndarray:
    """SC decoding where ``y`` indexes the entries of ``base``.

    ``base`` lists one ``(mu, theta)`` per observation symbol, so the
    posterior of position ``i`` is ``theta`` of entry ``y[i]``.
    """
    thetas = np.array([float(t) for t in base.thetas])
    return sc_decode_theta(thetas[np.asarray(y)], spec, u_frozen, backend)


def genie_errors(theta, u_true, backend: str | None = None) -> np.ndarray:
    """Per-index decision errors when every past bit is supplied correctly."""
    th = np.atleast_2d(np.asarray(theta, dtype=np.float64))
    n = _levels(th.shape[1])
    mask = np.zeros(th.shape[1], dtype=bool)
    truth = np.ascontiguousarray(np.atleast_2d(u_true), dtype=np.uint8)
    _, errors = kernels.get(backend).sc_decode_batch(th[:, bit_reversal(n)], mask, None, truth, True)
    return np.asarray(errors)


# ------------------------------------------------------------------- encoder

def _gf2_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A z = b`` over GF(2) for square nonsingular ``A``."""
    A = A.copy().astype(np.uint8)
    b = b.copy().astype(np.uint8)
    k = A.shape[0]
    for col in range(k):
        pivots = np.nonzero(A[col:, col])[0]
        if len(pivots) == 0:
            raise ValueError("systematic encoding matrix is singular for this index set")
        p = col + pivots[0]
        if p != col:
            A[[col, p]] = A[[p, col]]
            b[[col, p]] = b[[p, col]]
        rows = np.nonzero(A[:, col])[0]
        rows = rows[rows != col]
        A[rows] ^= A[col]
        b[rows] ^= b[col]
    return b


def encode(message, spec: CodeSpec, mode: str = NONSYSTEMATIC, shared_frozen_bits=None) -> np.ndarray:
    """Encode one block.

    Parameters
    ----------
    message : array_like of bits
        ``source``: the full source block ``x``. Channel modes: ``|I0|``
        message bits.
    spec : CodeSpec
    mode : {"source", "channel_nonsystematic", "channel_systematic"}
    shared_frozen_bits : array_like, optional
        ``|I1|`` bits shared with the decoder (zeros by default).

    Returns
    -------
    ndarray of uint8
        ``source``: ``u`` restricted to ``I1`` (in index order). Channel
        modes: the channel input ``x``.
    """
    N = 1 << spec.n
    I0 = _index_array(spec.I0, spec.n)
    I1 = _index_array(spec.I1, spec.n)
    msg = np.asarray(message, dtype=np.uint8)
    if mode == SOURCE:
        if msg.shape != (N,):
            raise ValueError(f"source mode needs a block of {N} bits")
        return polar_transform(msg)[I1]
    shared = np.zeros(len(I1), np.uint8) if shared_frozen_bits is None else np.asarray(shared_frozen_bits, np.uint8)
    if shared.shape != (len(I1),):
        raise ValueError(f"expected {len(I1)} shared frozen bits")
    if msg.shape != (len(I0),):
        raise ValueError(f"expected {len(I0)} message bits")
    if mode == NONSYSTEMATIC:
        u = np.zeros(N, np.uint8)
        u[I0] = msg
        u[I1] = shared
        return polar_transform(u)
    if mode == SYSTEMATIC:
        spec = bit_reverse_sets(spec)
        A = _index_array(spec.I0_reversed, spec.n)
        B = _index_array(spec.I1_reversed, spec.n)
        G = generator_matrix(spec.n)
        rhs = shared ^ (msg.astype(np.int64) @ G[np.ix_(A, I1)] % 2).astype(np.uint8)
        xB = _gf2_solve(G[np.ix_(B, I1)].T, rhs)
        x = np.zeros(N, np.uint8)
        x[A] = msg
        x[B] = xB
        return x
    raise ValueError(f"unknown encoding mode {mode!r}")


def systematic_message(u_hat, spec: CodeSpec) -> np.ndarray:
    """Recover the systematic message ``x[I0_reversed]`` from decoded ``u``."""
    spec = bit_reverse_sets(spec)
    x = polar_transform(u_hat)
    return x[..., _index_array(spec.I0_reversed, spec.n)]


# --------------------------------------------------------------- Monte Carlo

@dataclass
class MonteCarloStats:
    """Error counts of a simulation run."""

    mode: str
    n: int
    trials: int
    seed: int
    index_errors: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    block_errors: int = 0
    block_lower: object = None
    block_upper: object = None

    def freq(self) -> np.ndarray:
        return self.index_errors / self.trials

    def stderr(self) -> np.ndarray:
        f = self.freq()
        return np.sqrt(f * (1 - f) / self.trials)

    @property
    def block_freq(self) -> float:
        return self.block_errors / self.trials

    @property
    def block_stderr(self) -> float:
        f = self.block_freq
        return math.sqrt(f * (1 - f) / self.trials)

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "n": self.n, "trials": self.trials, "seed": self.seed}
        if self.mode == GENIE:
            out["per_index"] = [
                {
                    "index_bits": index_bits(i, self.n),
                    "errors": int(e),
                    "trials": self.trials,
                    "freq": float(f),
                    "stderr": float(s),
                }
                for i, (e, f, s) in enumerate(zip(self.index_errors, self.freq(), self.stderr()))
            ]
        if self.mode != BLOCK:
            return out
        out["block"] = {
            "errors": int(self.block_errors),
            "trials": self.trials,
            "freq": self.block_freq,
            "stderr": self.block_stderr,
            "lower": None if self.block_lower is None else format_scalar(self.block_lower),
            "upper": None if self.block_upper is None else format_scalar(self.block_upper),
        }
        return out


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(chunk,))))


def monte_carlo(
    model: ChannelModel,
    spec: CodeSpec,
    trials: int,
    seed: int = 0,
    mode: str = GENIE,
    threads: int = 1,
    backend: str | None = None,
) -> MonteCarloStats:
    """Simulate the SC decoder.

    Trials are split into fixed chunks of ``CHUNK`` blocks; chunk ``c``
    draws from a generator seeded by ``(seed, c)``, so results depend only
    on ``(seed, trials)`` and not on ``threads``.

    ``genie_per_index`` decides every index with the correct past bits
    and counts per-index errors. ``block`` runs the real decoder with the frozen bits of
    ``I1`` and counts blocks whose ``I0`` decisions are not all correct.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if mode not in (GENIE, BLOCK):
        raise ValueError(f"unknown simulation mode {mode!r}")
    N = 1 << spec.n
    rev = bit_reversal(spec.n)
    mask = np.array(spec.frozen_mask(), dtype=bool)
    I0 = _index_array(spec.I0, spec.n)
    kern = kernels.get(backend)
    bounds = (spec.block_lower, spec.block_upper)

    def run(chunk: int):
        count = min(CHUNK, trials - chunk * CHUNK)
        rng = _chunk_rng(seed, chunk)
        x, theta = model.sample(rng, count, N)
        u = polar_transform(x)
        th = np.ascontiguousarray(theta[:, rev])
        if mode == GENIE:
            _, errs = kern.sc_decode_batch(th, np.zeros(N, bool), None, u, True)
            return np.asarray(errs), 0
        u_hat, _ = kern.sc_decode_batch(th, mask, u, None, False)
        wrong = np.any(np.asarray(u_hat)[:, I0] != u[:, I0], axis=1)
        return np.zeros(N, np.int64), int(np.count_nonzero(wrong))

    chunks = range((trials + CHUNK - 1) // CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    stats = MonteCarloStats(mode, spec.n, trials, seed, block_lower=bounds[0], block_upper=bounds[1])
    stats.index_errors = np.sum([p[0] for p in parts], axis=0).astype(np.int64)
    stats.block_errors = int(sum(p[1] for p in parts))
    return stats
