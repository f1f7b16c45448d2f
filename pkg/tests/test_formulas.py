import itertools
import math
from fractions import Fraction

import pytest

from wrtree import formulas as F
from wrtree.montecarlo import enumerate_exact
from wrtree.weights import WeightSequence, parse_family

FAMILIES = ["uniform", "hoppe:0.5", "hoppe:2", "thetak:2,2", "thetak:3,2", "power:1", "power:-2",
            "wrt:2,3,0.5"]


@pytest.mark.parametrize("spec,n", list(itertools.product(FAMILIES, range(3, 8))))
def test_depth_and_branch_moments_match_oracle(spec, n):
    seq = parse_family(spec)
    for stat, fn in (("depth_last", F.depth_moments), ("branches", F.branch_moments)):
        d = enumerate_exact(seq, n, stat)
        f = fn(seq, n)
        assert abs(d.mean - f.mean) <= 1e-10
        assert abs(d.variance - f.variance) <= 1e-10


@pytest.mark.parametrize("spec,n", list(itertools.product(FAMILIES, range(2, 8))))
def test_leaf_expectation_matches_oracle(spec, n):
    seq = parse_family(spec)
    assert abs(F.leaf_expectation(seq, n) - enumerate_exact(seq, n, "leaves").mean) <= 1e-10


@pytest.mark.parametrize("theta,k,n", list(itertools.product((0.5, 1, 2, 3), (1, 2, 3), (4, 5, 6))))
def test_theta_k_closed_form(theta, k, n):
    seq = WeightSequence.theta_k(theta, k)
    assert abs(F.theta_k_leaves_exact(theta, k, n) - enumerate_exact(seq, n, "leaves").mean) <= 1e-10


def test_theta_k_closed_form_degenerate_cases():
    assert F.theta_k_leaves_exact(1, 1, 17) == pytest.approx(8.5, abs=1e-12)
    exact = Fraction(enumerate_exact(WeightSequence.theta_k(2, 2), 5, "leaves", exact=True).mean)
    assert abs(F.theta_k_leaves_exact(2, 2, 5) - float(exact)) <= 1e-10
    # large n switches to log-space; the two forms agree at the switch
    a = F.theta_k_leaves_exact(2, 3, 10_000)
    i = range(1, 10_000 - 3)
    prod = math.exp(math.fsum(math.log(4 + x) - math.log(6 + x) for x in i))
    direct = 5000 + 1.5 + 3 * 2 * (1 - 6) / (2 * (3 + 9999)) + prod
    assert a == pytest.approx(direct, rel=1e-12)
    assert F.theta_k_leaves_exact(2, 3, 10_001) - a == pytest.approx(0.5, abs=1e-3)
    with pytest.raises(ValueError):
        F.theta_k_leaves_exact(2, 3, 3)


def test_spec_moment_values():
    assert F.depth_moments(WeightSequence.uniform(), 4).mean == pytest.approx(11 / 6)
    assert F.depth_moments(WeightSequence.hoppe(2), 3).mean == pytest.approx(4 / 3)
    assert F.branch_moments(WeightSequence.power(1), 4).mean == pytest.approx(1.5)
    assert F.branch_moments(WeightSequence.hoppe(1), 3).mean == pytest.approx(1.5)
    assert F.branch_moments(WeightSequence.power(1), 10**6).mean == pytest.approx(2, abs=1e-5)


def test_hoppe_helpers_agree_with_general_moments():
    for theta, n in itertools.product((0.5, 1, 3), (3, 10, 1000)):
        seq = WeightSequence.hoppe(theta)
        assert F.hoppe_branch_mean(theta, n) == pytest.approx(F.branch_moments(seq, n).mean, rel=1e-12)
        assert F.hoppe_depth_mean(theta, n) == pytest.approx(F.depth_moments(seq, n).mean, rel=1e-12)


def test_wasserstein_bound():
    c = (math.sqrt(28) + math.sqrt(math.pi)) / math.sqrt(math.pi)
    assert F.wasserstein_normal_bound(1) == pytest.approx(c)
    assert F.wasserstein_normal_bound(1) == pytest.approx(3.985, abs=1e-3)
    assert F.wasserstein_normal_bound(100) == pytest.approx(0.3985, abs=1e-4)
    seq = WeightSequence.uniform()
    var = F.branch_moments(seq, 10**6).variance
    assert var == pytest.approx(math.log(10**6) - math.pi**2 / 6 + 0.5772156649, abs=1e-3)
    assert F.branch_clt_rate(seq, 10**6) == F.wasserstein_normal_bound(var)
    with pytest.raises(ValueError):
        F.wasserstein_normal_bound(0)


def test_hoppe_leaf_moments():
    assert F.hoppe_leaf_moments(1, 40).mean == 20
    assert F.hoppe_leaf_moments(3, 100).mean == 51
    assert F.hoppe_leaf_moments(1, 12).variance == 1
    d = enumerate_exact(WeightSequence.uniform(), 9, "leaves")
    assert abs(d.variance - 9 / 12) <= 1 / 9
    assert enumerate_exact(WeightSequence.uniform(), 3, "leaves").mean == pytest.approx(1.5)


def test_wrt_leaf_mean_bounds():
    seq = WeightSequence.eventually_one([2, 3, 0.5])
    b = F.wrt_leaf_mean_bounds(seq, 1000)
    assert (b.lo, b.hi) == (500 - 4.25, 500 + 4.25)
    assert b.lo <= F.leaf_expectation(seq, 1000) <= b.hi
    with pytest.raises(ValueError):
        F.wrt_leaf_mean_bounds(WeightSequence.power(1), 10)


def test_leaf_probability():
    assert F.leaf_probability(WeightSequence.power(1), 7, 7) == 1
    assert F.leaf_probability(WeightSequence.uniform(), 2, 3) == 0.5
    # uniform tree: node i is a leaf with probability (i - 1) / (n - 1)
    assert F.leaf_probability(WeightSequence.uniform(), 4, 10) == pytest.approx(3 / 9)
    with pytest.raises(ValueError):
        F.leaf_probability(WeightSequence.uniform(), 1, 5)


def test_concentration_bounds():
    assert F.hoppe_leaf_concentration_bound(1, 99, 10) == pytest.approx(2 * math.exp(-600 / 101))
    assert F.hoppe_leaf_concentration_bound(1, 99, 10) == pytest.approx(0.00526, abs=1e-5)
    assert F.hoppe_leaf_concentration_bound(1, 99, 1e-9) == 1.0
    assert F.leaf_concentration_bound(WeightSequence.hoppe(1), 99, 10) == pytest.approx(0.00526, abs=1e-5)
    for theta, n, t in itertools.product((0.5, 2, 7), (10, 500), (1, 5, 20)):
        seq = WeightSequence.hoppe(theta)
        assert F.leaf_concentration_bound(seq, n, t) == pytest.approx(
            F.hoppe_leaf_concentration_bound(theta, n, t))
    seq = WeightSequence.eventually_one([2, 2])
    assert F.leaf_concentration_bound(seq, 100, 2) == 1.0
    assert F.leaf_concentration_bound(seq, 100, 10) == pytest.approx(2 * math.exp(-6 * 64 / 104))
    assert F.leaf_concentration_bound(seq, 100, 0) == 1.0


def test_height_asymptotics():
    assert F.height_expectation_asymptotic(1000) == pytest.approx(18.78 - 2.90, abs=0.01)
    slope = (F.height_expectation_asymptotic(10**5) - F.height_expectation_asymptotic(10**3)) / math.log(100)
    slope_far = (F.height_expectation_asymptotic(10**300) - F.height_expectation_asymptotic(10**298)) / math.log(100)
    assert slope < slope_far < math.e
    assert math.e - slope_far < 0.01
    with pytest.raises(ValueError):
        F.height_expectation_asymptotic(2)


def test_largest_branch_limit_and_constant():
    assert F.largest_branch_limit_cdf_urt(1) == 1
    assert F.largest_branch_limit_cdf_urt(0.5) == pytest.approx(1 - math.log(2))
    assert F.largest_branch_limit_cdf_urt(0.75) == pytest.approx(0.71232, abs=1e-5)
    with pytest.raises(ValueError):
        F.largest_branch_limit_cdf_urt(0.4)
    assert 0.5 < F.golomb_dickman() < 0.7
    assert F.golomb_dickman() == 0.62432998854
