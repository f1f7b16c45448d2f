import json
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate, stats

from wrtree import montecarlo as mc
from wrtree.coupling import HOPPE_WRT, URT_MK
from wrtree.generator import RandomSource, generate_batch
from wrtree.weights import WeightSequence, parse_family


def test_shape_enumeration():
    assert [sum(1 for _ in mc.iter_shapes(n)) for n in range(1, 8)] == [1, 1, 2, 6, 24, 120, 720]
    for spec in ("hoppe:0.5", "thetak:3,2", "power:-2", "wrt:2,3,0.5"):
        seq = parse_family(spec)
        total = sum(p for _, p in mc.enumerate_shapes(seq, 6, exact=True))
        assert total == Fraction(1)


def test_exact_distributions():
    u = WeightSequence.uniform()
    d = mc.enumerate_exact(u, 3, "leaves", exact=True)
    assert d.probabilities == {1: Fraction(1, 2), 2: Fraction(1, 2)} and d.mean == Fraction(3, 2)
    d = mc.enumerate_exact(u, 3, "branches", exact=True)
    assert d.probabilities == mc.enumerate_exact(u, 3, "depth_last", exact=True).probabilities
    d = mc.enumerate_exact(WeightSequence.hoppe(2), 3, "branches", exact=True)
    assert d.probabilities == {1: Fraction(1, 3), 2: Fraction(2, 3)} and d.mean == Fraction(5, 3)
    assert mc.enumerate_exact(u, 6, "height").total() == pytest.approx(1, abs=1e-14)


def test_enumeration_cap():
    with pytest.raises(ValueError):
        mc.enumerate_exact(WeightSequence.uniform(), 10, "leaves")
    with pytest.raises(ValueError):
        mc.enumerate_exact(WeightSequence.uniform(), 11, "leaves", allow_large=True)
    with pytest.raises(ValueError):
        mc.enumerate_exact(WeightSequence.uniform(), 4, "nope")


def test_shape_codes_follow_enumeration_order():
    for n in (3, 4, 5, 6):
        shapes = np.array([[0, 0, *s] for s in mc.iter_shapes(n)])
        assert np.array_equal(mc.shape_codes(shapes), np.arange(shapes.shape[0]))


def test_two_sample_chi_square():
    seq = WeightSequence.hoppe(2)
    a = mc.shape_codes(generate_batch(seq, 5, 100_000, RandomSource(1)))
    b = mc.shape_codes(generate_batch(seq, 5, 100_000, RandomSource(2)))
    c = mc.shape_codes(generate_batch(WeightSequence.uniform(), 5, 100_000, RandomSource(3)))
    assert mc.chi_square_two_sample(a, b, 24)[1] > 1e-4
    assert mc.chi_square_two_sample(a, c, 24)[1] < 1e-10


def test_ks_matches_scipy():
    rng = np.random.default_rng(0)
    for x in (rng.normal(size=10_000), rng.exponential(size=500), rng.integers(0, 5, 3000)):
        z = (x - x.mean()) / x.std(ddof=1)
        assert mc.ks_normal(x) == pytest.approx(stats.kstest(z, "norm").statistic, abs=1e-12)
    assert mc.ks_normal(rng.normal(size=10_000)) < 0.02
    two = np.tile([-1.0, 1.0], 5000)
    assert mc.ks_normal(two) == pytest.approx(0.34, abs=0.01)
    with pytest.raises(ValueError):
        mc.ks_normal(np.ones(10))


def test_wasserstein_matches_quadrature():
    x = np.random.default_rng(1).integers(0, 4, 200).astype(float)
    z = np.sort((x - x.mean()) / x.std(ddof=1))
    ecdf = lambda t: np.searchsorted(z, t, side="right") / z.size
    f = lambda t: abs(ecdf(t) - stats.norm.cdf(t))
    pts = np.unique(z)
    total = integrate.quad(f, -12, pts[0])[0] + integrate.quad(f, pts[-1], 12)[0]
    total += sum(integrate.quad(f, a, b)[0] for a, b in zip(pts[:-1], pts[1:]))
    assert mc.wasserstein_normal(x) == pytest.approx(total, abs=1e-7)
    assert mc.wasserstein_normal(np.random.default_rng(2).normal(size=10_000)) < 0.03


def test_empirical_cdf():
    assert mc.empirical_cdf([1, 2, 2, 3], [0, 2, 3]) == [0.0, 0.75, 1.0]


def test_simulate_is_thread_independent():
    seq = WeightSequence.hoppe(2)
    n = 3000  # several blocks
    assert mc.block_rows(n) < 2000
    a = mc.simulate(seq, n, 2500, seed=5, threads=1)
    b = mc.simulate(seq, n, 2500, seed=5, threads=4)
    for k in mc.STATISTICS:
        assert np.array_equal(a[k], b[k])
    c = mc.simulate(seq, n, 2500, seed=6)
    assert not np.array_equal(a["leaves"], c["leaves"])


def test_simulate_stream_layout():
    seq = WeightSequence.uniform()
    n = 600
    rows = mc.block_rows(n)
    res = mc.simulate(seq, n, rows + 3, seed=9)
    first = generate_batch(seq, n, rows, RandomSource(9, 0))
    second = generate_batch(seq, n, 3, RandomSource(9, 1))
    from wrtree._kernels import batch_stats
    assert np.array_equal(res["leaves"], np.concatenate([batch_stats(first)[0], batch_stats(second)[0]]))


def test_block_rows():
    assert mc.block_rows(10) == 4096
    assert mc.block_rows(10**7) == 1
    assert mc.block_rows(2**21) == 1


def test_config_validation():
    u = WeightSequence.uniform()
    with pytest.raises(ValueError):
        mc.ExperimentConfig("nope", u, 5, 10, 1)
    with pytest.raises(ValueError):
        mc.ExperimentConfig("leaves", u, 5, 0, 1)
    with pytest.raises(ValueError):
        mc.ExperimentConfig("leaves", u, 12, 1, 1, mode="enumerate")
    with pytest.raises(ValueError):
        mc.ExperimentConfig("leaves", u, 5, 1, 1, mode="other")


def test_run_experiment_report():
    cfg = mc.ExperimentConfig("leaves", WeightSequence.hoppe(1), 99, 20_000, 3, t_grid=(0, 5, 10),
                              cdf_points=(40, 50, 60))
    r = mc.run_experiment(cfg)
    d = json.loads(r.to_json())
    assert set(d) >= {"config", "estimates", "cdf", "tails", "checks", "timing"}
    assert set(d["estimates"]) >= {"mean", "var", "stderr"}
    assert abs(r.mean - 49.5) < 4 * r.stderr
    assert r.tails[0]["bound"] == 1.0 and all(row["pass"] for row in r.tails)
    assert r.cdf_csv().splitlines()[0] == "x,cdf"
    assert r.tail_csv().splitlines()[0] == "t,empirical,bound,pass"
    assert len(r.tail_csv().splitlines()) == 4
    again = mc.run_experiment(mc.ExperimentConfig(**{**cfg.__dict__, "threads": 3}))
    assert not mc.report_equal(r, again) or r.config == again.config
    assert mc.report_equal(r, mc.run_experiment(cfg))


def test_two_node_experiment_is_degenerate():
    r = mc.run_experiment(mc.ExperimentConfig("leaves", WeightSequence.uniform(), 2, 50, 1))
    assert r.mean == 1 and r.variance == 0 and r.ks is None


def test_enumerate_mode_report():
    cfg = mc.ExperimentConfig("branches", WeightSequence.hoppe(2), 3, 1, 0, mode="enumerate",
                              cdf_points=(1, 2))
    r = mc.run_experiment(cfg)
    assert r.mean == pytest.approx(5 / 3) and r.cdf == [(1.0, pytest.approx(1 / 3)), (2.0, pytest.approx(1.0))]


def test_tail_rows_only_for_leaves():
    cfg = mc.ExperimentConfig("height", WeightSequence.uniform(), 20, 10, 1, t_grid=(1,))
    with pytest.raises(ValueError):
        mc.run_experiment(cfg)


def test_hoppe_tail_example():
    cfg = mc.ExperimentConfig("leaves", WeightSequence.hoppe(1), 99, 1_000_000, 21)
    rows = mc.verify_concentration(cfg, (0, 10))
    assert rows[0]["pass"] and rows[0]["bound"] == 1
    assert rows[1]["empirical"] < 0.00526 + 3 * math.sqrt(0.00526 / 1e6)


def test_wrt_tail_example():
    cfg = mc.ExperimentConfig("leaves", WeightSequence.eventually_one([2, 2]), 100, 200_000, 4)
    assert all(r["pass"] for r in mc.verify_concentration(cfg, (5, 10, 15)))


def test_coupled_experiment_checks():
    spec = mc.CouplingSpec(URT_MK, k=2, m=3)
    cfg = mc.ExperimentConfig("leaves", WeightSequence.theta_k(3, 2), 50, 2000, 1, coupling=spec)
    r = mc.run_experiment(cfg)
    names = {c["name"] for c in r.checks}
    assert {"pathwise:leaves", "pathwise:leaves_strict"} <= names
    seq = WeightSequence.eventually_one([2, 3, 0.5])
    res = mc.simulate_coupled(mc.CouplingSpec(HOPPE_WRT, k=3, seq=seq), 50, 3000, seed=2, threads=2)
    again = mc.simulate_coupled(mc.CouplingSpec(HOPPE_WRT, k=3, seq=seq), 50, 3000, seed=2)
    assert np.array_equal(res["target"]["height"], again["target"]["height"])
