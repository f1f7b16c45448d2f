"""Recursive trees stored as parent arrays, plus their exact statistics."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from ._kernels import tree_arrays


class RecursiveTree:
    """Rooted tree on nodes ``1..n`` with ``parent(j) < j``.

    ``parent`` is an integer array of length ``n + 1``; entries 0 and 1 are
    unused and kept at 0.
    """

    __slots__ = ("parent",)

    def __init__(self, parent, *, validate: bool = True):
        parent = np.array(parent, dtype=np.int64)
        if parent.ndim != 1 or parent.shape[0] < 2:
            raise ValueError("parent array must be 1-D with length n + 1 >= 2")
        if validate:
            labels = np.arange(parent.shape[0])
            p = parent[2:]
            if np.any(p < 1) or np.any(p >= labels[2:]):
                bad = int(np.flatnonzero((p < 1) | (p >= labels[2:]))[0]) + 2
                raise ValueError(f"node {bad} has invalid parent {int(parent[bad])}")
        parent[:2] = 0
        parent.setflags(write=False)
        self.parent = parent

    @classmethod
    def from_parents(cls, parents) -> "RecursiveTree":
        """Build from the list ``[parent(2), ..., parent(n)]``."""
        return cls(np.concatenate(([0, 0], np.asarray(parents, dtype=np.int64))))

    @classmethod
    def single(cls) -> "RecursiveTree":
        return cls(np.zeros(2, dtype=np.int64))

    @classmethod
    def path(cls, n: int) -> "RecursiveTree":
        return cls.from_parents(np.arange(1, n))

    @classmethod
    def star(cls, n: int) -> "RecursiveTree":
        return cls.from_parents(np.ones(n - 1, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.parent.shape[0] - 1

    def parent_of(self, j: int) -> int:
        if not 2 <= j <= self.n:
            raise IndexError(f"node {j} has no parent in a tree on {self.n} nodes")
        return int(self.parent[j])

    def parents(self) -> Tuple[int, ...]:
        """``(parent(2), ..., parent(n))``: the shape key used by the oracle."""
        return tuple(int(x) for x in self.parent[2:])

    def __eq__(self, other) -> bool:
        return isinstance(other, RecursiveTree) and np.array_equal(self.parent, other.parent)

    def __hash__(self) -> int:
        return hash(self.parent.tobytes())

    def __repr__(self) -> str:
        if self.n <= 12:
            return f"RecursiveTree(n={self.n}, parents={list(self.parents())})"
        return f"RecursiveTree(n={self.n})"

    # -- serialization ------------------------------------------------------
    def to_text(self) -> str:
        lines = [str(self.n)]
        lines.extend(f"{j} {int(p)}" for j, p in enumerate(self.parent[2:], start=2))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RecursiveTree":
        rows = [line.split() for line in text.splitlines() if line.strip()]
        if not rows or len(rows[0]) != 1:
            raise ValueError("tree file must start with a line holding n")
        n = int(rows[0][0])
        if n < 1 or len(rows) != n:
            raise ValueError(f"expected {n - 1} edge lines, found {len(rows) - 1}")
        parent = np.zeros(n + 1, dtype=np.int64)
        for expected, row in enumerate(rows[1:], start=2):
            if len(row) != 2 or int(row[0]) != expected:
                raise ValueError(f"edge line for node {expected} is malformed: {' '.join(row)}")
            parent[expected] = int(row[1])
        return cls(parent)

    def write(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def read(cls, path) -> "RecursiveTree":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class TreeStats:
    leaves: int
    height: int
    depth_last: int
    branch_sizes: Tuple[int, ...]  # decreasing
    num_branches: int
    largest_branch: int

    def as_dict(self) -> dict:
        return {
            "leaves": self.leaves,
            "height": self.height,
            "depth_last": self.depth_last,
            "branch_sizes": list(self.branch_sizes),
            "num_branches": self.num_branches,
            "largest_branch": self.largest_branch,
        }


def compute_stats(t: RecursiveTree) -> TreeStats:
    """All statistics of one tree in O(n).

    A leaf is a non-root node without children, so a single node has no
    leaves and height 0.
    """
    n = t.n
    if n == 1:
        return TreeStats(0, 0, 0, (), 0, 0)
    depth, nchild, top = tree_arrays(t.parent)
    heads = np.flatnonzero(t.parent == 1)
    sizes = np.bincount(top[2:], minlength=n + 1)[heads]
    sizes = tuple(sorted((int(s) for s in sizes), reverse=True))
    return TreeStats(
        leaves=int(np.count_nonzero(nchild[2:] == 0)),
        height=int(depth.max()),
        depth_last=int(depth[n]),
        branch_sizes=sizes,
        num_branches=len(sizes),
        largest_branch=sizes[0],
    )


def depth_of(t: RecursiveTree, i: int) -> int:
    """Number of parent steps from ``i`` up to the root."""
    if not 1 <= i <= t.n:
        raise IndexError(f"node {i} out of range 1..{t.n}")
    d = 0
    while i != 1:
        i = int(t.parent[i])
        d += 1
    return d
