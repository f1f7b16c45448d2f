"""Exact and asymptotic predictions for leaves, height, depth, branches and
the largest branch of weighted recursive trees."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .weights import WeightSequence

EXACT = "exact"
ASYMPTOTIC = "asymptotic-leading-terms"
BOUNDS = "two-sided-bounds"

GOLOMB_DICKMAN = 0.62432998854


@dataclass(frozen=True)
class MomentPrediction:
    mean: float
    variance: float
    kind: str = EXACT
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if self.kind == BOUNDS and not (self.lo <= self.hi):
            raise ValueError("two-sided bounds need lo <= hi")


def _bernoulli_sum(p: np.ndarray) -> MomentPrediction:
    # p[0] is the sure first term (i = 1), the rest are independent indicators
    mean = float(math.fsum(p))
    var = float(math.fsum(p[1:] * (1.0 - p[1:])))
    return MomentPrediction(mean, var, EXACT)


def depth_moments(seq: WeightSequence, n: int) -> MomentPrediction:
    """Mean and variance of the depth of node ``n``.

    The depth is ``1 + sum_{i=2}^{n-1} A_i`` with independent ``A_i`` of
    success probability ``w_i / S(i)``.
    """
    if n < 2:
        raise ValueError("depth of node n needs n >= 2")
    m = n - 1
    return _bernoulli_sum(seq.weights(m) / seq.prefix_sums(m))


def branch_moments(seq: WeightSequence, n: int) -> MomentPrediction:
    """Mean and variance of the number of children of the root.

    Node ``i + 1`` joins the root with probability ``w_1 / S(i)``, independently.
    """
    if n < 2:
        raise ValueError("branch count needs n >= 2")
    m = n - 1
    return _bernoulli_sum(seq.weight_at(1) / seq.prefix_sums(m))


def wasserstein_normal_bound(variance: float) -> float:
    """``(sqrt(28) + sqrt(pi)) / sqrt(pi) / sqrt(variance)``."""
    if not variance > 0:
        raise ValueError("variance must be positive")
    return (math.sqrt(28.0) + math.sqrt(math.pi)) / math.sqrt(math.pi) / math.sqrt(variance)


def branch_clt_rate(seq: WeightSequence, n: int) -> float:
    """Wasserstein distance bound between the standardized branch count and N(0, 1)."""
    return wasserstein_normal_bound(branch_moments(seq, n).variance)


def hoppe_leaf_moments(theta: float, n: int) -> MomentPrediction:
    """Leading terms ``n/2 + (theta-1)/2`` and ``n/12 + (theta-1)/12``; O(1/n) dropped."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return MomentPrediction(n / 2 + (theta - 1) / 2, n / 12 + (theta - 1) / 12, ASYMPTOTIC)


def wrt_leaf_mean_bounds(seq: WeightSequence, n: int) -> MomentPrediction:
    """``E[leaves] = n/2 + C + O(1/n)`` with ``|C| <= (sum_{i<=k} w_i + k) / 2``."""
    k = _constancy(seq)
    c = (seq.prefix_sum(k) + k) / 2 if k else 0.0
    return MomentPrediction(n / 2, n / 12, BOUNDS, lo=n / 2 - c, hi=n / 2 + c)


def theta_k_leaves_exact(theta: float, k: int, n: int) -> float:
    """Closed form for the mean number of leaves with ``k`` nodes of weight ``theta``."""
    if n <= k:
        raise ValueError(f"need n > k, got n={n}, k={k}")
    i = np.arange(1, n - k, dtype=np.float64)
    if n > 10_000:
        prod = math.exp(float(np.sum(np.log(theta * (k - 1) + i) - np.log(theta * k + i))))
    else:
        prod = float(np.prod((theta * (k - 1) + i) / (theta * k + i)))
    return (n / 2 + k * (theta - 1) / 2
            + k * theta * (1 - k * theta) / (2 * (k * (theta - 1) + n - 1))
            + (k - 1) / 2 * prod)


def leaf_probability(seq: WeightSequence, i: int, n: int) -> float:
    """Probability that node ``i`` has no children: ``prod_{j=i+1}^n (1 - w_i / S(j-1))``."""
    if not 2 <= i <= n:
        raise ValueError(f"need 2 <= i <= n, got i={i}, n={n}")
    if i == n:
        return 1.0
    S = seq.prefix_sums(n - 1)[i - 1:]
    return float(np.prod(1.0 - seq.weight_at(i) / S))


def leaf_expectation(seq: WeightSequence, n: int) -> float:
    """Exact mean leaf count as the sum of per-node leaf probabilities."""
    if n == 1:
        return 0.0
    return math.fsum(leaf_probability(seq, i, n) for i in range(2, n + 1))


def _constancy(seq: WeightSequence) -> int:
    k = seq.constancy_index
    if k is None:
        raise ValueError(f"{seq.spec} is not eventually constant at 1")
    return k


def leaf_concentration_bound(seq: WeightSequence, n: int, t: float) -> float:
    """Tail bound on ``P(|leaves - E leaves| >= t)``, clamped to [0, 1].

    With ``k`` the constancy index (at least 1) this is
    ``2 exp(-6 (t - 2k + 2)^2 / (n - k + 2 + S(k)))``; for ``k = 1`` it is the
    Hoppe form ``2 exp(-6 t^2 / (n + theta + 1))`` with ``theta = w_1``.
    """
    if t <= 0:
        return 1.0
    k = max(_constancy(seq), 1)
    shift = t - 2 * k + 2
    if shift <= 0:
        return 1.0
    bound = 2.0 * math.exp(-6.0 * shift * shift / (n - k + 2 + seq.prefix_sum(k)))
    return min(1.0, bound)


def hoppe_leaf_concentration_bound(theta: float, n: int, t: float) -> float:
    if t <= 0:
        return 1.0
    return min(1.0, 2.0 * math.exp(-6.0 * t * t / (n + theta + 1)))


def height_expectation_asymptotic(n: int) -> float:
    """``e ln n - 1.5 ln ln n``; the O(1) term is not resolved."""
    if n < 3:
        raise ValueError("height asymptotics need n >= 3")
    return math.e * math.log(n) - 1.5 * math.log(math.log(n))


def largest_branch_limit_cdf_urt(c: float) -> float:
    """``lim P(nu_n <= c n) = 1 - ln(1/c)`` for uniform trees, ``c`` in [1/2, 1]."""
    if not 0.5 <= c <= 1.0:
        raise ValueError(f"closed form holds only for c in [1/2, 1], got {c}")
    return 1.0 - math.log(1.0 / c)


def golomb_dickman() -> float:
    return GOLOMB_DICKMAN


def hoppe_branch_mean(theta: float, n: int) -> float:
    """``1 + sum_{i=2}^{n-1} theta / (theta + i - 1)``."""
    i = np.arange(2, n, dtype=np.float64)
    return 1.0 + math.fsum(theta / (theta + i - 1.0))


def hoppe_depth_mean(theta: float, n: int) -> float:
    """``1 + sum_{i=2}^{n-1} 1 / (theta + i - 1)``."""
    i = np.arange(2, n, dtype=np.float64)
    return 1.0 + math.fsum(1.0 / (theta + i - 1.0))
