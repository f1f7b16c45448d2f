import math
import threading
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wrtree.weights import WeightSequence, WeightTableExhausted, parse_family


def test_weight_values():
    h = WeightSequence.hoppe(2)
    assert h.weight_at(1) == 2 and h.weight_at(5) == 1
    assert all(WeightSequence.uniform().weight_at(i) == 1 for i in (1, 7, 10**9))
    t = WeightSequence.theta_k(3, 2)
    assert t.weight_at(2) == 3 and t.weight_at(3) == 1
    assert WeightSequence.power(-2).weight_at(4) == 1 / 16


def test_prefix_sum_values():
    assert WeightSequence.uniform().prefix_sum(5) == 5
    assert WeightSequence.theta_k(3, 2).prefix_sum(4) == 8
    assert WeightSequence.power(1).prefix_sum(3) == 6
    assert WeightSequence.hoppe(0.5).prefix_sum(4) == 3.5


@pytest.mark.parametrize("spec", ["uniform", "hoppe:0.5", "hoppe:2", "thetak:2,2", "thetak:3,2",
                                  "power:1", "power:-2", "power:0.5", "wrt:2,3,0.5"])
def test_prefix_sums_match_exact_rationals(spec):
    seq = parse_family(spec)
    S = seq.prefix_sums(200)
    for i in (1, 2, 3, 50, 200):
        if seq.family == "power" and seq.a != int(seq.a):
            exact = math.fsum(j ** seq.a for j in range(1, i + 1))
        else:
            exact = float(seq.exact_prefix_sum(i))
        assert abs(S[i - 1] - exact) <= 1e-12 * exact


def test_prefix_sum_relative_error_at_one_million():
    seq = WeightSequence.power(-2)
    m = 10**6
    got = seq.prefix_sums(m)
    ref = math.fsum((1.0 / np.arange(1, m + 1, dtype=np.float64) ** 2).tolist())
    assert abs(got[-1] - ref) <= 1e-12 * ref
    assert abs(got[-1] - math.pi**2 / 6) < 2e-6


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(min_value=Fraction(1, 1000), max_value=1000), min_size=1, max_size=40))
def test_custom_prefix_sums_property(table):
    seq = WeightSequence.custom(table)
    S = seq.prefix_sums(len(table))
    exact = np.cumsum([float(x) for x in table])
    total = Fraction(0)
    for i, x in enumerate(table):
        total += x
        assert abs(S[i] - float(total)) <= 1e-12 * float(total)
    assert np.all(np.diff(S) > 0)
    assert S.shape == exact.shape


def test_prefix_table_is_read_only():
    S = WeightSequence.power(1).prefix_sums(10)
    with pytest.raises(ValueError):
        S[0] = 5


def test_table_exhausted():
    seq = WeightSequence.custom([1.0] * 50)
    assert seq.weight_at(50) == 1
    with pytest.raises(WeightTableExhausted, match="weight table exhausted at index 51"):
        seq.weight_at(51)
    with pytest.raises(WeightTableExhausted):
        seq.prefix_sums(51)


def test_ones_tail_never_exhausts():
    seq = WeightSequence.eventually_one([2, 3, 0.5])
    assert seq.weight_at(10**6) == 1
    assert seq.prefix_sum(5) == 7.5
    assert seq.constancy_index == 3
    assert seq.spec == "wrt:2,3,0.5"


@pytest.mark.parametrize("spec,k", [("uniform", 0), ("hoppe:1", 0), ("hoppe:2", 1),
                                    ("thetak:2,3", 3), ("thetak:1,3", 0), ("power:1", None),
                                    ("power:0", 0), ("wrt:2,1,1", 1)])
def test_constancy_index(spec, k):
    assert parse_family(spec).constancy_index == k


@pytest.mark.parametrize("spec", ["uniform", "hoppe:2", "hoppe:0.5", "thetak:3,2", "power:-1",
                                  "wrt:2,3,0.5"])
def test_parse_round_trip(spec):
    assert parse_family(spec).spec == spec
    assert parse_family(parse_family(spec).spec).spec == spec


@pytest.mark.parametrize("bad", ["", "foo", "hoppe:0", "hoppe:-1", "hoppe:x", "thetak:2",
                                 "thetak:2,1.5", "thetak:2,0", "power:nan", "wrt:", "wrt:1,-2",
                                 "uniform:3", "custom:/nonexistent/file"])
def test_parse_rejects(bad):
    with pytest.raises((ValueError, OSError)):
        parse_family(bad)


def test_from_file(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("2\n0.5\n\n3\n")
    seq = parse_family(f"custom:{p}")
    assert seq.length == 3
    assert seq.exact_weight(2) == Fraction(1, 2)
    assert seq.prefix_sum(3) == 5.5
    p.write_text("1\n0\n")
    with pytest.raises(ValueError, match="positive"):
        WeightSequence.from_file(p)
    p.write_text("1\nabc\n")
    with pytest.raises(ValueError, match="not a decimal"):
        WeightSequence.from_file(p)


def test_exact_weights():
    assert WeightSequence.power(-2).exact_weight(3) == Fraction(1, 9)
    assert WeightSequence.hoppe(0.5).exact_prefix_sum(3) == Fraction(5, 2)
    with pytest.raises(ValueError):
        WeightSequence.power(0.5).exact_weight(2)


def test_concurrent_prefix_sums_agree():
    seq = WeightSequence.power(-1)
    ref = np.cumsum(1.0 / np.arange(1, 20001))
    errors = []

    def work(m):
        got = seq.prefix_sums(m)
        if got.shape[0] != m or not np.allclose(got, ref[:m], rtol=1e-12):
            errors.append(m)

    threads = [threading.Thread(target=work, args=(m,)) for m in range(1000, 20001, 1000)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors


def test_invalid_indices():
    with pytest.raises(IndexError):
        WeightSequence.uniform().weight_at(0)
    with pytest.raises(ValueError):
        WeightSequence.theta_k(2, 0)
    with pytest.raises(ValueError):
        WeightSequence.custom([])
