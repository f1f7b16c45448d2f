"""Pathwise couplings that rebuild a weighted recursive tree from a simpler one.

``urt-mk``
    A uniform tree on ``mk + n - k`` nodes whose first ``k`` blocks of ``m``
    consecutive labels are merged, giving a tree whose first ``k`` nodes have
    weight ``m``.
``hoppe-wrt``
    A Hoppe tree on ``n - k + 1`` nodes with root weight ``S(k)`` whose root is
    split into an independent weighted tree on ``k`` nodes, for weights with
    ``w_i = 1`` beyond ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ._kernels import batch_stats
from .generator import RNG, AttachmentTable, as_generator, generate_batch
from .tree import RecursiveTree
from .weights import WeightSequence

URT_MK = "urt-mk"
HOPPE_WRT = "hoppe-wrt"

# invariants proven for every sample; the others are reported, not enforced
GUARANTEED = {URT_MK: ("leaves",), HOPPE_WRT: ("leaves", "height")}


class CouplingViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class CoupledPair:
    source: RecursiveTree
    target: RecursiveTree
    params: Dict[str, object] = field(default_factory=dict)


def _urt_mk_index(m: int, k: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    big = m * k + n - k
    v = np.arange(big + 1)
    merged = np.where(v <= k * m, (v - 1) // m + 1, v - k * (m - 1))
    merged[0] = 0
    j = np.arange(2, n + 1)
    rep = np.where(j <= k, (j - 1) * m + 1, j + k * (m - 1))
    return merged, rep


def couple_urt_to_mk_batch(m: int, k: int, n: int, size: int,
                           rng: RNG) -> Tuple[np.ndarray, np.ndarray]:
    """Source and target parent arrays of ``size`` coupled samples."""
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if int(k) != k or k < 1 or n <= k:
        raise ValueError(f"need positive integer k < n, got k={k}, n={n}")
    m, k = int(m), int(k)
    big = m * k + n - k
    src = generate_batch(WeightSequence.uniform(), big, size, rng)
    merged, rep = _urt_mk_index(m, k, n)
    tgt = np.zeros((size, n + 1), dtype=np.int64)
    # the smallest label of a merged block decides the block's parent
    tgt[:, 2:] = merged[src[:, rep]]
    return src, tgt


def couple_urt_to_mk(m: int, k: int, n: int, rng: RNG) -> CoupledPair:
    src, tgt = couple_urt_to_mk_batch(m, k, n, 1, rng)
    return CoupledPair(RecursiveTree(src[0], validate=False), RecursiveTree(tgt[0], validate=False),
                       {"kind": URT_MK, "m": m, "k": k, "n": n})


def resolve_split_size(seq: WeightSequence, k: Optional[int] = None) -> int:
    ci = seq.constancy_index
    if ci is None:
        raise ValueError(f"{seq.spec} is not eventually constant at 1")
    if k is None:
        return max(ci, 1)
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if ci > k:
        raise ValueError(f"weights of {seq.spec} differ from 1 at index {ci} > k={k}")
    return int(k)


def couple_hoppe_to_wrt_batch(seq: WeightSequence, n: int, size: int, rng: RNG,
                              k: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Source (Hoppe) and target (weighted) parent arrays of ``size`` samples.

    Per sample the uniforms are consumed in this order: the Hoppe tree, the
    weighted tree on ``k`` nodes, then one draw per source node ``2..n-k+1``
    choosing its new parent among ``1..k`` when it was a root child.
    """
    k = resolve_split_size(seq, k)
    if n <= k:
        raise ValueError(f"need n > k, got n={n}, k={k}")
    theta = seq.prefix_sum(k)
    small = n - k + 1
    n_hoppe = max(small - 2, 0)
    n_head = max(k - 2, 0)
    u = as_generator(rng).random((size, n_hoppe + n_head + small - 1))

    hoppe = WeightSequence.hoppe(theta)
    src = np.zeros((size, small + 1), dtype=np.int64)
    src[:, 2] = 1
    if small >= 3:
        src = AttachmentTable(hoppe, small).sample(u[:, :n_hoppe])

    tgt = np.zeros((size, n + 1), dtype=np.int64)
    if k >= 2:
        tgt[:, 2] = 1
    if k >= 3:
        tgt[:, : k + 1] = AttachmentTable(seq, k).sample(u[:, n_hoppe:n_hoppe + n_head])

    head = seq.prefix_sums(k)
    r = u[:, n_hoppe + n_head:] * head[-1]
    choice = np.minimum(np.searchsorted(head, r, side="right"), k - 1) + 1
    sp = src[:, 2:]
    tgt[:, k + 1:] = np.where(sp == 1, choice, sp + (k - 1))
    return src, tgt


def couple_hoppe_to_wrt(seq: WeightSequence, n: int, rng: RNG,
                        k: Optional[int] = None) -> CoupledPair:
    k = resolve_split_size(seq, k)
    src, tgt = couple_hoppe_to_wrt_batch(seq, n, 1, rng, k)
    return CoupledPair(RecursiveTree(src[0], validate=False), RecursiveTree(tgt[0], validate=False),
                       {"kind": HOPPE_WRT, "theta": seq.prefix_sum(k), "k": k, "n": n})


def invariant_masks(kind: str, src: np.ndarray, tgt: np.ndarray, k: int,
                    m: int = 1) -> Dict[str, np.ndarray]:
    """Per-sample truth of each pathwise inequality for batched pairs.

    Keys: ``leaves`` (proven bound), ``height`` (hoppe-wrt only),
    ``leaves_strict`` (urt-mk, the strict form), ``largest_branch_transfer``
    (hoppe-wrt, ``|nu_target - nu_source| <= k``).
    """
    ls, hs, _, _, nus = batch_stats(src)
    lt, ht, _, _, nut = batch_stats(tgt)
    out = {}
    if kind == URT_MK:
        lo = ls - k * (m - 1)
        out["leaves"] = (lo <= lt) & (lt <= ls + k - 1)
        out["leaves_strict"] = (lo < lt) & (lt < ls + k - 1)
    elif kind == HOPPE_WRT:
        out["leaves"] = (ls <= lt) & (lt <= ls + k - 1)
        out["height"] = (hs <= ht) & (ht <= hs + k - 1)
        out["largest_branch_transfer"] = np.abs(nut - nus) <= k
    else:
        raise ValueError(f"unknown coupling {kind!r}")
    return out


def check_pathwise(pair: CoupledPair) -> Dict[str, bool]:
    """Every invariant of :func:`invariant_masks` evaluated on one pair."""
    p = pair.params
    masks = invariant_masks(p["kind"], pair.source.parent[None, :], pair.target.parent[None, :],
                            p["k"], p.get("m", 1))
    return {name: bool(v[0]) for name, v in masks.items()}
