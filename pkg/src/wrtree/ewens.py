"""Hoppe (Ewens) permutations of ``{2, ..., n}`` and their bijection with
recursive trees.

Label ``k`` either opens a new cycle or is inserted to the right of an
earlier label ``j``; the matching tree hangs ``k`` under the root or under
``j`` respectively, so cycles correspond to branches.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from . import _kernels
from .generator import RNG, as_generator
from .tree import RecursiveTree


@dataclass(frozen=True)
class CyclePermutation:
    """A permutation of ``{2..n}`` in cycle form.

    Each cycle starts at its smallest label (the label that opened it) and
    follows the permutation; cycles are ordered by their first label.
    """

    n: int
    cycles: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        labels = sorted(x for c in self.cycles for x in c)
        if labels != list(range(2, self.n + 1)):
            raise ValueError(f"cycles do not partition {{2..{self.n}}}")

    @classmethod
    def from_successors(cls, succ: np.ndarray) -> "CyclePermutation":
        n = succ.shape[0] - 1
        seen = set()
        cycles = []
        for x in range(2, n + 1):
            if x in seen:
                continue
            cyc = [x]
            seen.add(x)
            y = int(succ[x])
            while y != x:
                cyc.append(y)
                seen.add(y)
                y = int(succ[y])
            cycles.append(tuple(cyc))
        return cls(n, tuple(cycles))

    def successors(self) -> np.ndarray:
        """``succ[x]`` is the image of label ``x`` (entries 0 and 1 unused)."""
        succ = np.zeros(self.n + 1, dtype=np.int64)
        for cyc in self.cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                succ[a] = b
        return succ

    def cycle_type(self) -> Tuple[int, ...]:
        """``c[j-1]`` = number of cycles of length ``j``, for ``j = 1..n-1``."""
        c = [0] * max(self.n - 1, 1)
        for cyc in self.cycles:
            c[len(cyc) - 1] += 1
        return tuple(c)

    @property
    def num_cycles(self) -> int:
        return len(self.cycles)

    @property
    def longest_cycle(self) -> int:
        return max((len(c) for c in self.cycles), default=0)

    def __str__(self) -> str:
        return "".join("(" + " ".join(str(x) for x in c) + ")" for c in self.cycles)

    @classmethod
    def parse(cls, text: str) -> "CyclePermutation":
        """Inverse of ``str``: ``"(2 5)(3)(4 6)"``."""
        text = text.strip()
        groups = re.findall(r"\(([^()]*)\)", text)
        if re.sub(r"\([^()]*\)", "", text).strip() or not groups:
            raise ValueError(f"malformed cycle notation: {text!r}")
        try:
            cycles = [tuple(int(x) for x in g.split()) for g in groups]
        except ValueError:
            raise ValueError(f"malformed cycle notation: {text!r}") from None
        if any(not c for c in cycles):
            raise ValueError("empty cycle")
        # rotate each cycle to start at its minimum, order by first label
        cycles = [c[c.index(min(c)):] + c[:c.index(min(c))] for c in cycles]
        cycles.sort(key=lambda c: c[0])
        n = max(max(c) for c in cycles)
        return cls(n, tuple(cycles))


def sample_hoppe_successors(theta: float, n: int, size: int, rng: RNG) -> np.ndarray:
    """``size`` permutations as a ``(size, n + 1)`` successor array."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    if n < 2:
        raise ValueError("need n >= 2")
    u = as_generator(rng).random((size, n - 2))
    out = np.empty((size, n + 1), dtype=np.int64)
    _kernels.crp_successors(u, float(theta), out)
    return out


def sample_hoppe_permutation(theta: float, n: int, rng: RNG) -> CyclePermutation:
    """A permutation of ``{2..n}`` whose cycle type follows EW(theta).

    Label ``k`` opens a new cycle with probability ``theta / (theta + k - 2)``
    and otherwise goes to the right of one of the ``k - 2`` placed labels,
    each chosen with probability ``1 / (theta + k - 2)``.
    """
    return CyclePermutation.from_successors(sample_hoppe_successors(theta, n, 1, rng)[0])


def successors_to_parents(succ: np.ndarray) -> np.ndarray:
    succ = np.atleast_2d(np.ascontiguousarray(succ, dtype=np.int64))
    out = np.empty_like(succ)
    _kernels.successors_to_parents(succ, out)
    return out


def parents_to_successors(parents: np.ndarray) -> np.ndarray:
    parents = np.atleast_2d(np.ascontiguousarray(parents, dtype=np.int64))
    out = np.empty_like(parents)
    _kernels.parents_to_successors(parents, out)
    return out


def perm_to_tree(p: CyclePermutation) -> RecursiveTree:
    return RecursiveTree(successors_to_parents(p.successors())[0])


def tree_to_perm(t: RecursiveTree) -> CyclePermutation:
    if t.n < 2:
        raise ValueError("permutations live on {2..n}; need n >= 2")
    return CyclePermutation.from_successors(parents_to_successors(t.parent)[0])


def rising_factorial_log(theta: float, n: int) -> float:
    """``log(theta (theta + 1) ... (theta + n - 1))``."""
    return math.lgamma(theta + n) - math.lgamma(theta)


def ewens_pmf(theta: float, c: Sequence[int], n: int) -> float:
    """EW(theta) probability of the cycle type ``c`` (``c[j-1]`` cycles of length ``j``)."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    total = sum((j + 1) * cj for j, cj in enumerate(c))
    if total != n:
        raise ValueError(f"cycle type sums to {total}, expected {n}")
    if any(cj < 0 for cj in c):
        raise ValueError("cycle counts must be non-negative")
    if n <= 170:
        rising = math.prod(theta + i for i in range(n))
        value = math.factorial(n) / rising
        for j, cj in enumerate(c, start=1):
            if cj:
                value *= (theta / j) ** cj / math.factorial(cj)
        return value
    log = math.lgamma(n + 1) - rising_factorial_log(theta, n)
    for j, cj in enumerate(c, start=1):
        if cj:
            log += cj * (math.log(theta) - math.log(j)) - math.lgamma(cj + 1)
    return math.exp(log)


def iter_cycle_types(n: int) -> Iterator[Tuple[int, ...]]:
    """Every cycle type of a permutation of ``n`` elements (integer partitions)."""

    def parts(rest: int, largest: int) -> Iterator[List[int]]:
        if rest == 0:
            yield []
            return
        for p in range(min(rest, largest), 0, -1):
            for tail in parts(rest - p, p):
                yield [p] + tail

    for partition in parts(n, n):
        c = [0] * n
        for p in partition:
            c[p - 1] += 1
        yield tuple(c)
