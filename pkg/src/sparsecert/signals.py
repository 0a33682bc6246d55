"""Vector-level primitives: norms, sparsity, l1-entropy and sorted block partitions.

Signals are real 1-d numpy arrays.  Sorting is always stable on ties (lowest
original index first), so block partitions are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter


def as_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise InvalidParameter("a signal is a non-empty 1-d sequence of reals")
    if not np.all(np.isfinite(x)):
        raise InvalidParameter("signal entries must be finite")
    return x


def l0_norm(x) -> int:
    """Number of entries that are exactly nonzero."""
    return int(np.count_nonzero(as_signal(x)))


def lp_norm(x, p=2.0) -> float:
    x = as_signal(x)
    if p in ("inf", "infinity") or p == math.inf:
        return float(np.max(np.abs(x)))
    p = float(p)
    if p < 1:
        raise InvalidParameter(f"lp_norm needs p >= 1, got {p}")
    if p == 1:
        return float(np.sum(np.abs(x)))
    if p == 2:
        return float(np.linalg.norm(x))
    a = np.abs(x)
    scale = a.max()
    if scale == 0:
        return 0.0
    return float(scale * np.sum((a / scale) ** p) ** (1.0 / p))


def magnitude_order(x) -> np.ndarray:
    """Indices sorted by decreasing magnitude, ties broken by lowest index."""
    return np.argsort(-np.abs(as_signal(x)), kind="stable")


def sigma_s(x, s: int, p=2.0) -> float:
    """Best s-term approximation error of ``x`` in the l^p norm."""
    x = as_signal(x)
    if s < 0 or s > x.size:
        raise InvalidParameter(f"need 0 <= s <= N, got s={s}, N={x.size}")
    tail = magnitude_order(x)[s:]
    if tail.size == 0:
        return 0.0
    return lp_norm(x[tail], p)


def entropy(x) -> float:
    """l1-entropy ||x||_1^2 / ||x||_2^2 of a nonzero vector."""
    a = np.abs(as_signal(x))
    scale = a.max()
    if scale == 0.0:
        raise InvalidParameter("entropy is undefined for the zero vector")
    a = a / scale
    l1 = float(np.sum(a))
    return l1 * l1 / float(np.dot(a, a))


@dataclass(frozen=True)
class BlockPartition:
    """Index blocks of a signal sorted by decreasing magnitude.

    ``blocks[0]`` is the head of size ``head_size``; later blocks have
    ``tail_block_size`` indices each, except possibly the last.
    """

    source: np.ndarray
    head_size: int
    tail_block_size: int
    blocks: tuple

    def block_norms(self, p=2.0) -> list[float]:
        return [lp_norm(self.source[b], p) for b in self.blocks]

    @property
    def head(self) -> np.ndarray:
        return self.blocks[0]

    @property
    def tail(self) -> np.ndarray:
        if len(self.blocks) == 1:
            return np.empty(0, dtype=int)
        return np.concatenate(self.blocks[1:])


def sorted_blocks(x, t: int, s: int) -> BlockPartition:
    x = as_signal(x)
    if t < 1 or s < 1:
        raise InvalidParameter("block sizes must be positive")
    if t > x.size:
        raise InvalidParameter(f"head size t={t} exceeds N={x.size}")
    order = magnitude_order(x)
    blocks = [order[:t]]
    for start in range(t, x.size, s):
        blocks.append(order[start:start + s])
    return BlockPartition(source=x, head_size=t, tail_block_size=s, blocks=tuple(blocks))


@dataclass(frozen=True)
class SufficientCheck:
    holds: bool
    margin: float  # rhs - lhs; positive means the strict inequality holds
    lhs: float
    rhs: float
    factor: float


def _block_check(x, t: int, s: int, factor: float) -> SufficientCheck:
    part = sorted_blocks(x, t, s)
    norms = part.block_norms(2)
    lhs = norms[0]
    rhs = factor * math.fsum(norms[1:])
    return SufficientCheck(holds=lhs < rhs, margin=rhs - lhs, lhs=lhs, rhs=rhs, factor=factor)


def nsp2_sufficient(x, s: int) -> SufficientCheck:
    """Test ||x_{S1}||_2 < (4/5) sum_{k>1} ||x_{Sk}||_2 with blocks of size s."""
    x = as_signal(x)
    if s < 1 or x.size <= s:
        raise InvalidParameter(f"need 1 <= s < N, got s={s}, N={x.size}")
    return _block_check(x, s, s, 0.8)


def improved_block_sizes(s: int) -> tuple[int, int]:
    """Head ceil(6s/5) and tail floor(4s/5) of the improved partition."""
    return -(-6 * s // 5), (4 * s) // 5


def improved_factor(s: int) -> float:
    if s % 5 == 0:
        return math.sqrt(4.0 / 5.0)
    return math.sqrt(4.0 * s / 5.0 - 1.0) / math.sqrt(s)


def nsp2_improved_sufficient(x, s: int) -> SufficientCheck:
    """Improved block test with head ceil(6s/5) and tails floor(4s/5)."""
    x = as_signal(x)
    if s < 2:
        raise InvalidParameter(f"the improved test needs s >= 2, got {s}")
    t, tail = improved_block_sizes(s)
    if x.size <= t:
        raise InvalidParameter(f"need N > ceil(6s/5) = {t}, got N={x.size}")
    return _block_check(x, t, tail, improved_factor(s))
