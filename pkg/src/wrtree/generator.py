"""Sequential sampling of weighted recursive trees.

Node ``j`` attaches to ``i < j`` with probability ``w_i / S(j-1)``.  One
uniform is consumed per node ``j = 3..n`` (node 2 always joins the root), so
drawing a batch of ``B`` trees from one generator gives exactly the trees
that ``B`` consecutive :func:`generate` calls on that generator would give.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .tree import RecursiveTree
from .weights import WeightSequence, WeightTableExhausted


@dataclass(frozen=True)
class RandomSource:
    """A reproducible random stream identified by ``(seed, stream)``.

    Streams with different ids are derived through :class:`numpy.random.SeedSequence`
    spawn keys and are statistically independent.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream: int) -> "RandomSource":
        return RandomSource(self.seed, stream)


RNG = Union[RandomSource, np.random.Generator]


def as_generator(rng: RNG) -> np.random.Generator:
    """A fresh generator for a :class:`RandomSource`; generators pass through."""
    if isinstance(rng, RandomSource):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RandomSource or numpy Generator, got {type(rng).__name__}")


class AttachmentTable:
    """Prefix sums ``S(1..n-1)`` plus a bucket index for O(1) expected lookups.

    The lookup result is identical to a binary search of the prefix table;
    the bucket index only narrows the starting interval.
    """

    def __init__(self, seq: WeightSequence, n: int):
        self.seq = seq
        self.n = n
        m = max(n - 1, 1)
        self.S = np.ascontiguousarray(seq.prefix_sums(m))
        self.inv_delta = m / self.S[-1]
        self.guide = _kernels.build_guide(self.S, self.inv_delta)

    def sample(self, u: np.ndarray) -> np.ndarray:
        """Parent arrays for uniforms of shape ``(B, n-2)``."""
        u = np.ascontiguousarray(u, dtype=np.float64)
        out = np.empty((u.shape[0], self.n + 1), dtype=np.int64)
        _kernels.sample_parents(u, self.S, self.guide, self.inv_delta, out)
        return out


def _check_n(seq: WeightSequence, n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if seq.length is not None and n - 1 > seq.length:
        raise WeightTableExhausted(seq.length + 1)


def generate_batch(seq: WeightSequence, n: int, size: int, rng: RNG,
                   table: AttachmentTable | None = None) -> np.ndarray:
    """``size`` independent trees as a ``(size, n + 1)`` parent array."""
    _check_n(seq, n)
    if n <= 2:
        out = np.zeros((size, n + 1), dtype=np.int64)
        if n == 2:
            out[:, 2] = 1
        return out
    if table is None:
        table = AttachmentTable(seq, n)
    u = as_generator(rng).random((size, n - 2))
    return table.sample(u)


def generate(seq: WeightSequence, n: int, rng: RNG) -> RecursiveTree:
    """One weighted recursive tree on ``n`` nodes."""
    parents = generate_batch(seq, n, 1, rng)
    return RecursiveTree(parents[0], validate=False)


def attachment_prob(seq: WeightSequence, i: int, j: int) -> float:
    """``w_i / S(j-1)``: probability that node ``j`` picks ``i`` as its parent."""
    if not 1 <= i < j:
        raise ValueError(f"need 1 <= i < j, got i={i}, j={j}")
    return seq.weight_at(i) / seq.prefix_sum(j - 1)
