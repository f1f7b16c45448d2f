"""Brute-force enumeration oracle and the Monte Carlo replication harness."""
from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats as sps

from . import coupling as cp
from ._kernels import batch_stats
from .formulas import leaf_concentration_bound, leaf_expectation
from .generator import AttachmentTable, RandomSource, generate_batch
from .weights import WeightSequence

STATISTICS = ("leaves", "height", "depth_last", "branches", "largest_branch")
ENUMERATION_CAP = 9


# ---------------------------------------------------------------------------
# enumeration oracle
# ---------------------------------------------------------------------------

def iter_shapes(n: int) -> Iterator[Tuple[int, ...]]:
    """All ``(n-1)!`` parent tuples ``(p(2), ..., p(n))`` with ``p(j) < j``."""
    return itertools.product(*(range(1, j) for j in range(2, n + 1)))


def shape_probability(seq: WeightSequence, parents: Sequence[int], exact: bool = False):
    """``prod_j w_{p(j)} / S(j-1)``."""
    if exact:
        w = [None] + [seq.exact_weight(i) for i in range(1, len(parents) + 1)]
        prob = Fraction(1)
        total = Fraction(0)
    else:
        w = [None] + [seq.weight_at(i) for i in range(1, len(parents) + 1)]
        prob = 1.0
        total = 0.0
    for j, p in enumerate(parents, start=2):
        total += w[j - 1]
        prob *= w[p] / total
    return prob


def small_tree_stats(parents: Sequence[int]) -> Dict[str, int]:
    """Plain-Python statistics of a small tree given ``(p(2), ..., p(n))``."""
    n = len(parents) + 1
    par = (0, 0) + tuple(parents)
    if n == 1:
        return dict.fromkeys(STATISTICS, 0)
    has_child = [False] * (n + 1)
    depth = [0] * (n + 1)
    head = [0] * (n + 1)
    for j in range(2, n + 1):
        p = par[j]
        has_child[p] = True
        depth[j] = depth[p] + 1
        head[j] = j if p == 1 else head[p]
    sizes: Dict[int, int] = {}
    for j in range(2, n + 1):
        sizes[head[j]] = sizes.get(head[j], 0) + 1
    return {
        "leaves": sum(1 for j in range(2, n + 1) if not has_child[j]),
        "height": max(depth),
        "depth_last": depth[n],
        "branches": len(sizes),
        "largest_branch": max(sizes.values()),
    }


@dataclass
class ExactDistribution:
    probabilities: Dict[int, object]
    mean: object
    variance: object

    @classmethod
    def from_table(cls, table: Dict[int, object]) -> "ExactDistribution":
        if any(isinstance(p, Fraction) for p in table.values()):
            mean = sum((v * p for v, p in table.items()), Fraction(0))
            var = sum(((v - mean) ** 2 * p for v, p in table.items()), Fraction(0))
        else:
            mean = math.fsum(v * p for v, p in table.items())
            var = math.fsum((v - mean) ** 2 * p for v, p in table.items())
        return cls(dict(sorted(table.items())), mean, var)

    def total(self):
        values = list(self.probabilities.values())
        return sum(values, Fraction(0)) if values and isinstance(values[0], Fraction) else math.fsum(values)


def _check_enumeration_size(n: int, allow_large: bool) -> None:
    cap = ENUMERATION_CAP + 1 if allow_large else ENUMERATION_CAP
    if n < 1 or n > cap:
        raise ValueError(f"enumeration supports 1 <= n <= {cap} "
                         f"({'with' if allow_large else 'without'} override), got {n}")


def enumerate_shapes(seq: WeightSequence, n: int, exact: bool = False,
                     allow_large: bool = False) -> List[Tuple[Tuple[int, ...], object]]:
    """Every tree shape on ``n`` nodes with its exact probability."""
    _check_enumeration_size(n, allow_large)
    return [(p, shape_probability(seq, p, exact)) for p in iter_shapes(n)]


def enumerate_exact(seq: WeightSequence, n: int, statistic: str, exact: bool = False,
                    allow_large: bool = False) -> ExactDistribution:
    """Exact law of ``statistic`` by iterating over all ``(n-1)!`` shapes."""
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}")
    table: Dict[int, object] = {}
    for parents, prob in enumerate_shapes(seq, n, exact, allow_large):
        v = small_tree_stats(parents)[statistic]
        table[v] = table.get(v, 0) + prob
    return ExactDistribution.from_table(table)


# ---------------------------------------------------------------------------
# shape-law goodness of fit
# ---------------------------------------------------------------------------

def shape_codes(parents: np.ndarray) -> np.ndarray:
    """Mixed-radix index of each row's shape; matches the order of :func:`iter_shapes`."""
    parents = np.atleast_2d(parents)
    n = parents.shape[1] - 1
    code = np.zeros(parents.shape[0], dtype=np.int64)
    for j in range(2, n + 1):
        code = code * (j - 1) + (parents[:, j] - 1)
    return code


def shape_law(seq: WeightSequence, n: int) -> np.ndarray:
    return np.array([p for _, p in enumerate_shapes(seq, n)], dtype=np.float64)


def chi_square_shapes(parents: np.ndarray, probs: np.ndarray) -> Tuple[float, float]:
    """Pearson chi-square of sampled shapes against exact shape probabilities."""
    counts = np.bincount(shape_codes(parents), minlength=probs.shape[0])
    expected = probs / probs.sum() * counts.sum()
    res = sps.chisquare(counts, expected)
    return float(res.statistic), float(res.pvalue)


def chi_square_two_sample(codes_a: np.ndarray, codes_b: np.ndarray, bins: int) -> Tuple[float, float]:
    """Homogeneity test between two samples of category codes."""
    table = np.vstack([np.bincount(codes_a, minlength=bins), np.bincount(codes_b, minlength=bins)])
    table = table[:, table.sum(axis=0) > 0]
    res = sps.chi2_contingency(table, correction=False)
    return float(res.statistic), float(res.pvalue)


# ---------------------------------------------------------------------------
# replication harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingSpec:
    kind: str
    k: int
    m: int = 1
    seq: Optional[WeightSequence] = None

    def describe(self) -> dict:
        d = {"kind": self.kind, "k": self.k}
        if self.kind == cp.URT_MK:
            d["m"] = self.m
        else:
            d["family"] = self.seq.spec
        return d


@dataclass
class ExperimentConfig:
    statistic: str
    family: WeightSequence
    n: int
    replications: int
    seed: int
    mode: str = "montecarlo"
    t_grid: Tuple[float, ...] = ()
    cdf_points: Tuple[float, ...] = ()
    coupling: Optional[CouplingSpec] = None
    threads: int = 1
    allow_large: bool = False

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.mode not in ("montecarlo", "enumerate"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.mode == "enumerate":
            _check_enumeration_size(self.n, self.allow_large)

    def describe(self) -> dict:
        return {
            "statistic": self.statistic,
            "family": self.family.spec,
            "n": self.n,
            "replications": self.replications,
            "seed": self.seed,
            "mode": self.mode,
            "t_grid": list(self.t_grid),
            "cdf_points": list(self.cdf_points),
            "coupling": None if self.coupling is None else self.coupling.describe(),
        }


def block_rows(n: int) -> int:
    """Replications per random stream; depends on ``n`` only so results do not
    depend on how blocks are scheduled."""
    return int(max(1, min(4096, (1 << 21) // (n + 1))))


def _blocks(replications: int, n: int) -> List[Tuple[int, int]]:
    rows = block_rows(n)
    return [(b, min(rows, replications - b * rows)) for b in range(-(-replications // rows))]


def _run_blocks(work, replications: int, n: int, threads: int) -> List:
    blocks = _blocks(replications, n)
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda b: work(*b), blocks))
    return [work(*b) for b in blocks]


def simulate(seq: WeightSequence, n: int, replications: int, seed: int,
             threads: int = 1) -> Dict[str, np.ndarray]:
    """All statistics of ``replications`` independent trees, in replication order.

    Replication block ``b`` draws from ``RandomSource(seed, b)``.
    """
    table = AttachmentTable(seq, n) if n >= 3 else None

    def work(block: int, rows: int):
        parents = generate_batch(seq, n, rows, RandomSource(seed, block), table)
        return batch_stats(parents)

    parts = _run_blocks(work, replications, n, threads)
    return {name: np.concatenate([p[i] for p in parts]) for i, name in enumerate(STATISTICS)}


def simulate_coupled(spec: CouplingSpec, n: int, replications: int, seed: int,
                     threads: int = 1, enforce: bool = True) -> Dict[str, Dict[str, np.ndarray]]:
    """Coupled samples: statistics of source and target plus per-invariant masks.

    With ``enforce`` any sample breaking a proven invariant raises
    :class:`CouplingViolation`.
    """
    if spec.kind == cp.URT_MK:
        n_src = spec.m * spec.k + n - spec.k
    else:
        n_src = n - spec.k + 1

    def work(block: int, rows: int):
        rng = RandomSource(seed, block)
        if spec.kind == cp.URT_MK:
            src, tgt = cp.couple_urt_to_mk_batch(spec.m, spec.k, n, rows, rng)
        else:
            src, tgt = cp.couple_hoppe_to_wrt_batch(spec.seq, n, rows, rng, spec.k)
        masks = cp.invariant_masks(spec.kind, src, tgt, spec.k, spec.m)
        return batch_stats(src), batch_stats(tgt), masks

    parts = _run_blocks(work, replications, max(n, n_src), threads)
    source = {s: np.concatenate([p[0][i] for p in parts]) for i, s in enumerate(STATISTICS)}
    target = {s: np.concatenate([p[1][i] for p in parts]) for i, s in enumerate(STATISTICS)}
    masks = {name: np.concatenate([p[2][name] for p in parts]) for name in parts[0][2]}
    if enforce:
        for name in cp.GUARANTEED[spec.kind]:
            bad = np.flatnonzero(~masks[name])
            if bad.size:
                r = int(bad[0])
                raise cp.CouplingViolation(
                    f"{spec.kind} invariant '{name}' failed at replication {r}: "
                    f"source leaves={source['leaves'][r]} height={source['height'][r]}, "
                    f"target leaves={target['leaves'][r]} height={target['height'][r]}")
    return {"source": source, "target": target, "masks": masks}


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

def ks_normal(samples) -> float:
    """Sup-distance between the ECDF of the standardized samples and N(0, 1).

    Samples are standardized with the sample mean and the ``ddof=1`` standard
    deviation.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two samples")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise ValueError("samples have zero variance")
    z = np.sort((x - x.mean()) / sd)
    cdf = special.ndtr(z)
    m = z.size
    # ties: evaluate the ECDF on both sides of each distinct value
    hi = np.searchsorted(z, z, side="right") / m
    lo = np.searchsorted(z, z, side="left") / m
    return float(max(np.max(hi - cdf), np.max(cdf - lo)))


def wasserstein_normal(samples) -> float:
    """W1 distance between the standardized samples and N(0, 1).

    Uses the quantile coupling: the i-th order statistic is matched with the
    i-th normal quantile cell and ``E|Z - z_i|`` is integrated in closed form.
    """
    x = np.asarray(samples, dtype=np.float64)
    z = np.sort((x - x.mean()) / x.std(ddof=1))
    m = z.size
    edges = special.ndtri(np.arange(1, m) / m)
    lo = np.concatenate(([-np.inf], edges))
    hi = np.concatenate((edges, [np.inf]))
    c = np.clip(z, lo, hi)

    def pdf(t):
        return np.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)

    Phi = special.ndtr
    below = z * (Phi(c) - Phi(lo)) + (pdf(c) - pdf(lo))
    above = (pdf(c) - pdf(hi)) - z * (Phi(hi) - Phi(c))
    return float(np.sum(below + above))


def empirical_cdf(samples, points) -> List[float]:
    x = np.sort(np.asarray(samples, dtype=np.float64))
    return [float(np.searchsorted(x, p, side="right") / x.size) for p in points]


@dataclass
class ExperimentReport:
    mean: float
    variance: float
    stderr: float
    cdf: List[Tuple[float, float]]
    ks: Optional[float]
    tails: List[Dict[str, object]]
    config: dict
    wall_time: float
    checks: List[Dict[str, object]] = field(default_factory=list)
    distribution: Optional[Dict[int, float]] = None

    def to_dict(self) -> dict:
        d = {
            "config": self.config,
            "estimates": {"mean": self.mean, "var": self.variance, "stderr": self.stderr,
                          "ks_normal": self.ks},
            "cdf": [{"x": x, "cdf": c} for x, c in self.cdf],
            "tails": self.tails,
            "checks": self.checks,
            "timing": {"wall_seconds": self.wall_time},
        }
        if self.distribution is not None:
            d["distribution"] = {str(k): v for k, v in self.distribution.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def cdf_csv(self) -> str:
        return "x,cdf\n" + "".join(f"{x},{c}\n" for x, c in self.cdf)

    def tail_csv(self) -> str:
        rows = "".join(f"{r['t']},{r['empirical']},{r['bound']},{str(r['pass']).lower()}\n"
                       for r in self.tails)
        return "t,empirical,bound,pass\n" + rows


def tail_table(samples, center: float, t_grid, bound) -> List[Dict[str, object]]:
    """Rows ``P(|X - center| >= t)`` against ``bound(t)``; pass when the
    empirical tail is at most the bound plus three binomial standard errors."""
    x = np.asarray(samples, dtype=np.float64)
    dev = np.abs(x - center)
    rows = []
    for t in t_grid:
        emp = float(np.mean(dev >= t))
        b = float(bound(t))
        se = math.sqrt(max(b * (1 - b), 0.0) / x.size)
        rows.append({"t": float(t), "empirical": emp, "bound": b, "pass": emp <= b + 3 * se})
    return rows


def _tail_bound_for(cfg: ExperimentConfig):
    return lambda t: leaf_concentration_bound(cfg.family, cfg.n, t)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Simulate (or enumerate) ``cfg.statistic`` and summarise it."""
    start = time.perf_counter()
    if cfg.mode == "enumerate":
        dist = enumerate_exact(cfg.family, cfg.n, cfg.statistic, allow_large=cfg.allow_large)
        values = np.array(list(dist.probabilities))
        probs = np.array([float(p) for p in dist.probabilities.values()])
        cdf = [(float(x), float(probs[values <= x].sum())) for x in cfg.cdf_points]
        return ExperimentReport(float(dist.mean), float(dist.variance), 0.0, cdf, None, [],
                                cfg.describe(), time.perf_counter() - start,
                                distribution={int(v): float(p) for v, p in dist.probabilities.items()})

    checks = []
    if cfg.coupling is None:
        x = simulate(cfg.family, cfg.n, cfg.replications, cfg.seed, cfg.threads)[cfg.statistic]
    else:
        res = simulate_coupled(cfg.coupling, cfg.n, cfg.replications, cfg.seed, cfg.threads)
        x = res["target"][cfg.statistic]
        for name, mask in res["masks"].items():
            checks.append({"name": f"pathwise:{name}", "value": float(mask.mean()),
                           "target": 1.0, "tolerance": 0.0, "pass": bool(mask.all())})
    x = x.astype(np.float64)
    reps = x.size
    mean = float(x.mean())
    var = float(x.var(ddof=1)) if reps > 1 else 0.0
    stderr = math.sqrt(var / reps)
    ks = ks_normal(x) if reps > 1 and var > 0 else None
    cdf = list(zip(map(float, cfg.cdf_points), empirical_cdf(x, cfg.cdf_points)))
    tails = []
    if cfg.t_grid:
        if cfg.statistic != "leaves":
            raise ValueError("tail tables are defined for the leaf count only")
        tails = tail_table(x, leaf_expectation(cfg.family, cfg.n), cfg.t_grid, _tail_bound_for(cfg))
    return ExperimentReport(mean, var, stderr, cdf, ks, tails, cfg.describe(),
                            time.perf_counter() - start, checks)


def verify_concentration(cfg: ExperimentConfig, t_grid) -> List[Dict[str, object]]:
    """Empirical leaf tails (centred at the exact mean) against the exponential bound."""
    if cfg.statistic != "leaves":
        raise ValueError("concentration checks apply to the leaf count")
    x = simulate(cfg.family, cfg.n, cfg.replications, cfg.seed, cfg.threads)["leaves"]
    return tail_table(x, leaf_expectation(cfg.family, cfg.n), t_grid, _tail_bound_for(cfg))


def report_equal(a: ExperimentReport, b: ExperimentReport) -> bool:
    """Equality ignoring wall-clock time."""
    da, db = asdict(a), asdict(b)
    da.pop("wall_time")
    db.pop("wall_time")
    return json.dumps(da, sort_keys=True, default=str) == json.dumps(db, sort_keys=True, default=str)
